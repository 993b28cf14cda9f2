"""Damped Picard fixed-point iteration coupling the HJB and KFP solvers.

One outer iteration maps a density trajectory to the value trajectories
(backward solve), extracts the drift D_pH_k(x, Dv_k), transports the
initial densities forward, and damps: m <- (1 - theta) m + theta m_new.
Convergence is measured by the sup over time points of the spatial L2
distance stacked over populations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import Grid, TimeGrid, gradient
from .costs import CostModel
from .hamiltonians import HamiltonianModel
from .hjb import HJBProblem, solve_hjb_backward
from .kfp import KFPProblem, solve_kfp_forward, validate_initial


@dataclass
class MFGProblem:
    """Full system data: grids, per-population models, costs and m0."""

    grid: Grid
    time_grid: TimeGrid
    viscosities: tuple[float, ...]
    hamiltonians: list[HamiltonianModel]
    cost: CostModel
    m0: np.ndarray  # (N, n_cells)

    def __post_init__(self):
        self.viscosities = tuple(float(nu) for nu in self.viscosities)
        self.m0 = np.atleast_2d(np.asarray(self.m0, dtype=float))
        n = self.n_populations
        if len(self.hamiltonians) != n or self.cost.n_populations != n:
            raise ValueError("population counts of models do not match")
        if self.m0.shape != (n, self.grid.n_cells):
            raise ValueError("m0 shape does not match grid/populations")
        zero_drift = np.zeros((n, self.grid.n_cells, self.grid.dim))
        report = validate_initial(self.m0, zero_drift, self.grid)
        if not report.accepted:
            raise ValueError(report.message)

    @property
    def n_populations(self) -> int:
        return len(self.viscosities)


@dataclass
class ConvergenceTrace:
    residuals: list[float] = field(default_factory=list)
    damping: float = 1.0
    wall_time: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.residuals)


@dataclass
class MFGSolution:
    values: np.ndarray     # (steps + 1, N, n_cells)
    densities: np.ndarray  # (steps + 1, N, n_cells)
    converged: bool
    iterations: int
    residual: float


def drift_from_values(problem: MFGProblem, values: np.ndarray) -> np.ndarray:
    """D_pH_k(x, Dv_k(t, x)) on every time point, shape (n_t+1, N, n_cells, d)."""
    grid = problem.grid
    x = grid.centers()
    n_t = problem.time_grid.steps
    npop = problem.n_populations
    out = np.empty((n_t + 1, npop, grid.n_cells, grid.dim))
    for k in range(npop):
        ham = problem.hamiltonians[k]
        for j in range(n_t + 1):
            out[j, k] = ham.grad_p(x, gradient(grid, values[j, k]))
    return out


def trajectory_distance(grid: Grid, m_a: np.ndarray, m_b: np.ndarray) -> float:
    """Sup over time points of the population-stacked spatial L2 distance."""
    diff = m_a - m_b
    per_time = np.sqrt(np.sum(diff * diff, axis=(1, 2)) * grid.cell_volume)
    return float(np.max(per_time))


def constant_in_time(problem: MFGProblem, m: np.ndarray) -> np.ndarray:
    return np.broadcast_to(
        m, (problem.time_grid.steps + 1,) + m.shape).copy()


def picard_solve(problem: MFGProblem, damping: float = 0.5, tol: float = 1e-9,
                 max_iter: int = 100, init: np.ndarray | None = None
                 ) -> tuple[MFGSolution, ConvergenceTrace]:
    """Iterate m -> KFP(HJB(m)) with damping until the residual drops below tol.

    Non-convergence is returned (converged=False), not raised: the
    small-data regime is the only one where a contraction is guaranteed.
    """
    if not (0.0 < damping <= 1.0):
        raise ValueError("damping must lie in (0, 1]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    t0 = time.perf_counter()
    if init is None:
        m = constant_in_time(problem, problem.m0)
    else:
        m = np.array(init, dtype=float)
    trace = ConvergenceTrace(damping=damping)
    values = None
    converged = False
    residual = np.inf
    for _ in range(max_iter):
        hjb = HJBProblem(problem.grid, problem.time_grid, problem.viscosities,
                         problem.hamiltonians, cost=problem.cost, density=m)
        values = solve_hjb_backward(hjb)
        drift = drift_from_values(problem, values)
        kfp = KFPProblem(problem.grid, problem.time_grid, problem.viscosities,
                         drift, problem.m0)
        m_new = solve_kfp_forward(kfp)
        residual = trajectory_distance(problem.grid, m_new, m)
        trace.residuals.append(residual)
        m = (1.0 - damping) * m + damping * m_new
        if residual <= tol:
            converged = True
            break
    # refresh the values on the final density so that v(T) = G(., m(T)) holds
    hjb = HJBProblem(problem.grid, problem.time_grid, problem.viscosities,
                     problem.hamiltonians, cost=problem.cost, density=m)
    values = solve_hjb_backward(hjb)
    trace.wall_time = time.perf_counter() - t0
    solution = MFGSolution(values=values, densities=m, converged=converged,
                           iterations=trace.iterations, residual=residual)
    return solution, trace


@dataclass
class MultistartReport:
    solutions: list[MFGSolution]
    traces: list[ConvergenceTrace]
    n_converged: int
    max_pairwise_distance: float | None
    verdict: str
    pairwise_distances: list[dict] = field(default_factory=list)


def multistart_probe(problem: MFGProblem, n_starts: int, damping: float = 0.5,
                     tol: float = 1e-9, max_iter: int = 100, seed: int = 0
                     ) -> MultistartReport:
    """Run the fixed-point iteration from several initial density guesses.

    The first start is the constant-in-time extension of m0; the others are
    time-constant sampled densities.  The verdict compares the max pairwise
    trajectory distance among converged runs against 10 * tol.
    """
    if n_starts < 2:
        raise ValueError("at least 2 starts are required")
    from .sampling import DensitySampler

    sampler = DensitySampler(problem.grid, problem.n_populations, seed)
    starts = [constant_in_time(problem, problem.m0)]
    for _ in range(n_starts - 1):
        starts.append(constant_in_time(problem, sampler.density()))

    solutions, traces = [], []
    for init in starts:
        sol, tr = picard_solve(problem, damping=damping, tol=tol,
                               max_iter=max_iter, init=init)
        solutions.append(sol)
        traces.append(tr)

    converged = [(i, s) for i, s in enumerate(solutions) if s.converged]
    if not converged:
        return MultistartReport(solutions, traces, 0, None,
                                "no converged runs")
    pairwise = []
    for a in range(len(converged)):
        for b in range(a + 1, len(converged)):
            i, sol_i = converged[a]
            j, sol_j = converged[b]
            pairwise.append({"start_a": i, "start_b": j,
                             "distance": trajectory_distance(
                                 problem.grid, sol_i.densities,
                                 sol_j.densities)})
    dist = max((p["distance"] for p in pairwise), default=0.0)
    verdict = ("unique fixed point observed" if dist <= 10.0 * tol
               else "distinct fixed points observed")
    return MultistartReport(solutions, traces, len(converged), dist, verdict,
                            pairwise_distances=pairwise)
