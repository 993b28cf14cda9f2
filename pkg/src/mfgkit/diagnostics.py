"""Certificate constants, the smallness function Psi, and empirical probes.

The uniqueness certificate multiplies the horizon, the Lipschitz constants
of the costs, and sup/Lipschitz bounds of D_pH over the realized gradient
range:

    Psi = T * Cbar_H^2 * C * (L_G + L_F * C_H * T / 2),
    C   = N * C_H * exp(C_H^4 * T^2) * M^2,

with C_H normalized to max(C_H, 1).  Psi < 1 certifies the small-data
uniqueness regime; any empirically estimated ingredient downgrades the
verdict from "certified" to "empirical".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Grid, gradient, linf_norm
from .coupler import MFGProblem, MFGSolution, picard_solve, trajectory_distance
from .hamiltonians import HamiltonianModel


def _gradient_bounding_box(grid: Grid, solutions: list[MFGSolution]
                           ) -> tuple[np.ndarray, np.ndarray]:
    lo = np.full(grid.dim, np.inf)
    hi = np.full(grid.dim, -np.inf)
    for sol in solutions:
        n_t, npop, _ = sol.values.shape
        for j in range(n_t):
            for k in range(npop):
                g = gradient(grid, sol.values[j, k])
                lo = np.minimum(lo, g.min(axis=0))
                hi = np.maximum(hi, g.max(axis=0))
    return lo, hi


def _lattice(lo: np.ndarray, hi: np.ndarray, points_per_axis: int) -> np.ndarray:
    axes = [np.linspace(lo[i], hi[i], points_per_axis) if hi[i] > lo[i]
            else np.array([lo[i]]) for i in range(lo.size)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def gradient_range_constants(solutions: list[MFGSolution],
                             hamiltonians: list[HamiltonianModel],
                             grid: Grid, points_per_axis: int = 5
                             ) -> tuple[float, float]:
    """Sup and Lipschitz constants of D_pH over the realized gradient range.

    The convex hull of the discrete gradients is approximated from outside
    by its axis-aligned bounding box, sampled on a lattice; the Lipschitz
    constant combines pairwise difference quotients with finite-difference
    estimates of the p-Jacobian norm.
    """
    if not solutions:
        raise ValueError("at least one solution is required")
    lo, hi = _gradient_bounding_box(grid, solutions)
    lattice = _lattice(lo, hi, points_per_axis)
    x = grid.centers()
    n_x = x.shape[0]
    c_h = 0.0
    cbar = 0.0
    fd_h = 1e-6 * max(1.0, float(np.max(np.abs(lattice))))
    for ham in hamiltonians:
        dp_at = []
        for p in lattice:
            pts = np.broadcast_to(p, (n_x, p.size))
            dp = ham.grad_p(x, pts)
            if not np.all(np.isfinite(dp)):
                raise ValueError(f"non-finite D_pH at lattice point {p}")
            dp_at.append(dp)
            c_h = max(c_h, float(np.max(np.linalg.norm(dp, axis=-1))))
            # finite-difference Jacobian norm at this lattice point
            jac = np.empty((n_x, p.size, p.size))
            for i in range(p.size):
                e = np.zeros(p.size)
                e[i] = fd_h
                jac[:, :, i] = (ham.grad_p(x, np.broadcast_to(p + e, (n_x, p.size)))
                                - ham.grad_p(x, np.broadcast_to(p - e, (n_x, p.size)))
                                ) / (2 * fd_h)
            cbar = max(cbar, float(np.max(np.linalg.norm(jac, ord=2, axis=(1, 2)))))
        for a in range(len(lattice)):
            for b in range(a + 1, len(lattice)):
                dpq = float(np.linalg.norm(lattice[a] - lattice[b]))
                if dpq == 0.0:
                    continue
                diff = np.linalg.norm(dp_at[a] - dp_at[b], axis=-1)
                cbar = max(cbar, float(np.max(diff)) / dpq)
    return c_h, cbar


def compute_psi(T: float, L_F: float, L_G: float, C_H: float, Cbar_H: float,
                N: int, M: float) -> float:
    """The smallness function; zero when T = 0 or Cbar_H = 0."""
    for name, val in [("T", T), ("L_F", L_F), ("L_G", L_G), ("C_H", C_H),
                      ("Cbar_H", Cbar_H), ("N", N), ("M", M)]:
        if val < 0:
            raise ValueError(f"{name} must be nonnegative")
    if T == 0.0 or Cbar_H == 0.0:
        return 0.0
    ch = max(C_H, 1.0)
    cost_term = L_G + L_F * ch * T / 2.0
    if cost_term == 0.0:
        return 0.0
    with np.errstate(over="ignore"):
        c = N * ch * np.exp(min(ch**4 * T**2, 745.0)) * M**2
    return float(T * Cbar_H**2 * c * cost_term)


def _critical_value(psi_of: callable, upper_start: float = 1.0) -> float | None:
    """Largest argument with psi < 1 (bisection); None when unbounded."""
    lo = 0.0
    hi = upper_start
    if psi_of(hi) < 1.0:
        for _ in range(60):
            hi *= 2.0
            if psi_of(hi) >= 1.0:
                break
        else:
            return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if psi_of(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class ValueBoundResult:
    passed: bool
    bound: float
    observed: float
    margin: float
    tol_scheme: float


def value_bound_check(solution: MFGSolution, C_F: float, C_G: float,
                      alpha: float, T: float, dt: float, h: float
                      ) -> ValueBoundResult:
    """Check max_k ||v_k||_inf against the super/subsolution bound.

    Bound: C_G + T (C_F + alpha) plus a scheme tolerance
    10 (dt + h^2)(C_F + alpha + C_G).
    """
    tol_scheme = 10.0 * (dt + h * h) * (C_F + alpha + C_G)
    bound = C_G + T * (C_F + alpha) + tol_scheme
    observed = float(np.max(np.abs(solution.values)))
    return ValueBoundResult(passed=observed <= bound, bound=bound,
                            observed=observed, margin=bound - observed,
                            tol_scheme=tol_scheme)


@dataclass
class DensityBoundEntry:
    population: int
    sup_density: float
    bracket: float


@dataclass
class DensityBoundReport:
    entries: list[DensityBoundEntry]
    fitted_C: float | None = None
    fitted_r: float | None = None
    violations: list[int] = field(default_factory=list)


def density_bound_ingredients(problem: MFGProblem, solution: MFGSolution
                              ) -> list[DensityBoundEntry]:
    """Per population: empirical sup of m_k and the a priori bracket
    1 + ||m_{0,k}||_inf + (1 + T) ||D_pH_k(., Dv_k)||_inf."""
    grid = problem.grid
    x = grid.centers()
    T = problem.time_grid.horizon
    out = []
    for k in range(problem.n_populations):
        sup_m = float(np.max(solution.densities[:, k, :]))
        drift_sup = 0.0
        for j in range(problem.time_grid.steps + 1):
            dp = problem.hamiltonians[k].grad_p(
                x, gradient(grid, solution.values[j, k]))
            drift_sup = max(drift_sup, float(np.max(np.linalg.norm(dp, axis=-1))))
        bracket = 1.0 + linf_norm(grid, problem.m0[k]) + (1.0 + T) * drift_sup
        out.append(DensityBoundEntry(k, sup_m, bracket))
    return out


def density_bound_report(entry_batches: list[list[DensityBoundEntry]]
                         ) -> DensityBoundReport:
    """Fit M <= C * bracket^r across a batch of runs by log-log regression.

    Entries above twice the fitted envelope are flagged by batch index.
    """
    entries = [e for batch in entry_batches for e in batch]
    report = DensityBoundReport(entries=entries)
    pos = [e for e in entries if e.sup_density > 0]
    if len(pos) >= 2:
        lx = np.log([e.bracket for e in pos])
        ly = np.log([e.sup_density for e in pos])
        if np.ptp(lx) > 0:
            r, logc = np.polyfit(lx, ly, 1)
        else:
            r, logc = 1.0, float(np.max(ly - lx))
        report.fitted_r = float(r)
        report.fitted_C = float(np.exp(logc))
        for i, batch in enumerate(entry_batches):
            for e in batch:
                if e.sup_density > 2.0 * report.fitted_C * e.bracket**report.fitted_r:
                    report.violations.append(i)
                    break
    return report


@dataclass
class PerturbationRow:
    eps: float
    converged: bool
    ratio: float | None


@dataclass
class PerturbationTable:
    rows: list[PerturbationRow]
    bounded: bool


def continuous_dependence_probe(problem: MFGProblem, eps_list: list[float],
                                seed: int, damping: float = 0.5,
                                tol: float = 1e-9, max_iter: int = 100
                                ) -> PerturbationTable:
    """Solve from m0 and from fixed-direction perturbations of size eps.

    Reports sup_t ||dm(t)||_2^2 / ||dm_0||_2^2 per eps; the table is
    "bounded" when max/min of the ratios stays below 10.
    """
    from .sampling import project_to_simplex

    grid = problem.grid
    base_sol, _ = picard_solve(problem, damping=damping, tol=tol,
                               max_iter=max_iter)
    if not base_sol.converged:
        raise RuntimeError("base problem did not converge")
    rng = np.random.default_rng(seed)
    direction = rng.normal(0.0, 1.0, problem.m0.shape)
    direction -= direction.mean(axis=1, keepdims=True)  # mass-neutral
    direction /= np.sqrt(np.sum(direction**2) * grid.cell_volume)

    rows = []
    for eps in eps_list:
        m0_pert = project_to_simplex(grid, problem.m0 + eps * direction)
        pert = MFGProblem(grid, problem.time_grid, problem.viscosities,
                          problem.hamiltonians, problem.cost, m0_pert)
        sol, _ = picard_solve(pert, damping=damping, tol=tol,
                              max_iter=max_iter)
        if not sol.converged:
            rows.append(PerturbationRow(eps, False, None))
            continue
        dm0 = m0_pert - problem.m0
        denom = float(np.sum(dm0 * dm0) * grid.cell_volume)
        num = trajectory_distance(grid, sol.densities, base_sol.densities) ** 2
        rows.append(PerturbationRow(eps, True, num / denom))
    ratios = [r.ratio for r in rows if r.ratio is not None]
    bounded = bool(ratios) and max(ratios) <= 10.0 * min(ratios)
    return PerturbationTable(rows=rows, bounded=bounded)


@dataclass
class DiagnosticsReport:
    C_H: float
    Cbar_H: float
    M: float
    L_F: float
    L_G: float
    psi: float
    provenance: dict[str, str]
    verdict: str
    value_bound: ValueBoundResult | None
    density_bound: list[DensityBoundEntry]
    critical_T: float | None = None
    critical_Cbar_H: float | None = None
    critical_cost_scale: float | None = None

    def to_dict(self) -> dict:
        d = {
            "C_H": self.C_H, "Cbar_H": self.Cbar_H, "M": self.M,
            "L_F": self.L_F, "L_G": self.L_G, "psi": self.psi,
            "provenance": self.provenance, "verdict": self.verdict,
            "critical_T": self.critical_T,
            "critical_Cbar_H": self.critical_Cbar_H,
            "critical_cost_scale": self.critical_cost_scale,
            "density_bound": [
                {"population": e.population, "sup_density": e.sup_density,
                 "bracket": e.bracket} for e in self.density_bound],
        }
        if self.value_bound is not None:
            vb = self.value_bound
            d["value_bound"] = {"passed": vb.passed, "bound": vb.bound,
                                "observed": vb.observed, "margin": vb.margin,
                                "tol_scheme": vb.tol_scheme}
        else:
            d["value_bound"] = None
        return d


def diagnose(problem: MFGProblem, solution: MFGSolution,
             L_F: float | None = None, L_G: float | None = None,
             estimator_seed: int = 0, estimator_pairs: int = 100,
             alpha: float | None = None) -> DiagnosticsReport:
    """Assemble the full certificate report for one solved configuration.

    Declared cost constants are read from the cost model (or the L_F / L_G
    overrides); missing ones are estimated from sampled density pairs and
    flagged as empirical, which makes the final verdict empirical too.
    """
    from .costs import estimate_lipschitz
    from .sampling import DensitySampler

    grid, tg = problem.grid, problem.time_grid
    provenance: dict[str, str] = {}

    c_h, cbar = gradient_range_constants([solution], problem.hamiltonians, grid)
    provenance["C_H"] = "empirical (upper-bounded on box containing the hull)"
    provenance["Cbar_H"] = "empirical (upper-bounded on box containing the hull)"

    lf = L_F if L_F is not None else problem.cost.L_F
    lg = L_G if L_G is not None else problem.cost.L_G
    if lf is None or lg is None:
        sampler = DensitySampler(grid, problem.n_populations, estimator_seed)
        lf_hat, lg_hat = estimate_lipschitz(problem.cost, grid, sampler,
                                            estimator_pairs)
        if lf is None:
            lf, provenance["L_F"] = lf_hat, "empirical"
        else:
            provenance["L_F"] = "declared"
        if lg is None:
            lg, provenance["L_G"] = lg_hat, "empirical"
        else:
            provenance["L_G"] = "declared"
    else:
        provenance["L_F"] = provenance["L_G"] = "declared"

    m_sup = float(np.max(solution.densities))
    provenance["M"] = "empirical"

    T = tg.horizon
    npop = problem.n_populations
    psi = compute_psi(T, lf, lg, c_h, cbar, npop, m_sup)
    all_declared = all(v == "declared" for v in provenance.values())
    if psi < 1.0:
        verdict = ("certified small-data regime" if all_declared
                   else "empirical small-data regime")
    else:
        verdict = "no smallness certificate"

    crit_T = _critical_value(
        lambda t: compute_psi(t, lf, lg, c_h, cbar, npop, m_sup), max(T, 1.0))
    crit_cbar = _critical_value(
        lambda c: compute_psi(T, lf, lg, c_h, c, npop, m_sup), max(cbar, 1.0))
    crit_scale = _critical_value(
        lambda s: compute_psi(T, s * lf, s * lg, c_h, cbar, npop, m_sup), 1.0)

    vb = None
    c_f = getattr(problem.cost, "C_F", None)
    c_g = getattr(problem.cost, "C_G", None)
    alpha = alpha if alpha is not None else max(
        (h.alpha for h in problem.hamiltonians if h.alpha is not None),
        default=None)
    if c_f is not None and c_g is not None and alpha is not None:
        vb = value_bound_check(solution, c_f, c_g, alpha, T, tg.dt,
                               max(grid.spacing))

    entries = density_bound_ingredients(problem, solution)
    return DiagnosticsReport(C_H=c_h, Cbar_H=cbar, M=m_sup, L_F=lf, L_G=lg,
                             psi=psi, provenance=provenance, verdict=verdict,
                             value_bound=vb, density_bound=entries,
                             critical_T=crit_T, critical_Cbar_H=crit_cbar,
                             critical_cost_scale=crit_scale)
