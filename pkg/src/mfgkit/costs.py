"""Running/terminal cost catalog and empirical probes of their constants.

A cost model maps a vector of probability densities m = (m_1, ..., m_N) on a
grid to per-population running costs F_k(x, m) and terminal costs
G_k(x, m), both returned as (N, n_cells) arrays.  Declared constants
(L_F, L_G, C_F, C_G, C_G') are metadata; `estimate_lipschitz` and
`check_monotonicity` probe them empirically on sampled density pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Grid, gradient, integrate, l2_norm


@dataclass(frozen=True)
class DensityVector:
    """N probability densities on a common grid, shape (N, n_cells)."""

    grid: Grid
    data: np.ndarray

    MASS_TOL = 1e-10

    def __post_init__(self):
        data = np.atleast_2d(np.asarray(self.data, dtype=float))
        object.__setattr__(self, "data", data)
        if data.shape[1] != self.grid.n_cells:
            raise ValueError("density shape does not match grid")
        if np.min(data) < -1e-12:
            raise ValueError("negative density")
        masses = data.sum(axis=1) * self.grid.cell_volume
        if np.max(np.abs(masses - 1.0)) > self.MASS_TOL:
            raise ValueError(f"density masses {masses} deviate from 1")

    @property
    def n_populations(self) -> int:
        return self.data.shape[0]


class CostModel:
    """Base cost model.

    Subclasses implement `running` and `terminal`; declared constants
    default to None (unknown).
    """

    n_populations: int
    L_F: float | None = None
    L_G: float | None = None
    C_F: float | None = None
    C_G: float | None = None
    C_G_prime: float | None = None

    def running(self, grid: Grid, m: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def terminal(self, grid: Grid, m: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def _finite_or_raise(arr: np.ndarray, what: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} produced non-finite values")
    return arr


class FixedCost(CostModel):
    """Costs independent of the density (decoupled system).

    `running_fields` and `terminal_fields` are callables x -> values or
    plain constants, one per population.
    """

    def __init__(self, n_populations: int, running_fields=None,
                 terminal_fields=None, **constants):
        self.n_populations = n_populations
        self._f = self._normalize(running_fields, n_populations)
        self._g = self._normalize(terminal_fields, n_populations)
        for name, val in constants.items():
            setattr(self, name, val)

    @staticmethod
    def _normalize(fields, n):
        if fields is None:
            fields = [0.0] * n
        out = []
        for f in fields:
            if callable(f):
                out.append(f)
            else:
                c = float(f)
                out.append(lambda x, c=c: np.full(np.asarray(x).shape[0], c))
        return out

    def running(self, grid, m):
        x = grid.centers()
        return _finite_or_raise(np.stack([f(x) for f in self._f]), "running cost")

    def terminal(self, grid, m):
        x = grid.centers()
        return _finite_or_raise(np.stack([g(x) for g in self._g]), "terminal cost")


def _kernel_matrix(kernel, grid: Grid) -> np.ndarray:
    """Quadrature matrix A with (A m)_i = integral K(x_i, y) m(y) dy."""
    x = grid.centers()
    mat = np.asarray(kernel(x, x), dtype=float) * grid.cell_volume
    if not np.all(np.isfinite(mat)):
        raise ValueError("kernel evaluator returned non-finite values")
    return mat


def window_kernel(radius: float):
    """Indicator of the box window {y : max_i |x_i - y_i| <= radius}."""
    def kernel(x, y):
        diff = np.abs(x[:, None, :] - y[None, :, :])
        return (diff.max(axis=-1) <= radius).astype(float)
    return kernel


def smoothed_negative_part(r: np.ndarray, eps: float) -> np.ndarray:
    """(sqrt(r^2 + eps^2) - r) / 2; the exact negative part when eps = 0."""
    r = np.asarray(r, dtype=float)
    return 0.5 * (np.sqrt(r * r + eps * eps) - r)


class SchellingCost(CostModel):
    """Threshold discomfort cost for two populations.

    F_k(x, m) is the (optionally smoothed) negative part of the local
    population-k share minus the threshold a_k, where the share is computed
    from window-kernel neighborhood masses.  The terminal cost is zero.
    """

    def __init__(self, kernels, thresholds, eta: float, eps: float = 0.05,
                 **constants):
        if len(thresholds) != 2:
            raise ValueError("Schelling cost is defined for exactly 2 populations")
        if eta <= 0:
            raise ValueError("eta must be positive")
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        if callable(kernels):
            kernels = [kernels, kernels]
        self.n_populations = 2
        self.kernels = list(kernels)
        self.thresholds = tuple(float(a) for a in thresholds)
        self.eta = float(eta)
        self.eps = float(eps)
        self._mats: dict[Grid, list[np.ndarray]] = {}
        self.C_F = constants.pop("C_F", max(self.thresholds) + (eps / 2 if eps else 0))
        self.C_G = constants.pop("C_G", 0.0)
        for name, val in constants.items():
            setattr(self, name, val)

    def neighborhood_mass(self, grid: Grid, m: np.ndarray) -> np.ndarray:
        if grid not in self._mats:
            self._mats[grid] = [_kernel_matrix(k, grid) for k in self.kernels]
        mats = self._mats[grid]
        return np.stack([mats[k] @ m[k] for k in range(2)])

    def running(self, grid, m):
        m = np.atleast_2d(np.asarray(m, dtype=float))
        if m.shape[0] != 2:
            raise ValueError("expected 2 populations")
        nk = self.neighborhood_mass(grid, m)
        if np.min(nk) < 0:
            nk = np.maximum(nk, 0.0)
        total = nk[0] + nk[1] + self.eta
        out = np.empty_like(nk)
        for k in range(2):
            ratio = nk[k] / total
            out[k] = smoothed_negative_part(ratio - self.thresholds[k], self.eps)
        return _finite_or_raise(out, "Schelling cost")

    def terminal(self, grid, m):
        return np.zeros((2, grid.n_cells))


class IntegralCost(CostModel):
    """Nonlocal costs through kernel averages of the densities.

    Running: F_k(x, m) = F_o_k(x, z(x)) with z_j(x) = sum_i K_k[j][i] * m_i
    averaged by quadrature.  Terminal:
    G_k(x, m) = g1_k(x) * sum_i (Kbar_k[i] m_i)(x) + g2_k(x).
    """

    def __init__(self, n_populations: int, f_outer, kernels,
                 g1=None, g2=None, terminal_kernels=None, **constants):
        self.n_populations = n_populations
        self.f_outer = f_outer              # list of F_o_k(x, z) callables
        self.kernels = kernels              # kernels[k][j][i] or kernels[k][i]
        self.g1 = g1
        self.g2 = g2
        self.terminal_kernels = terminal_kernels
        self._cache: dict = {}
        for name, val in constants.items():
            setattr(self, name, val)

    def _mat(self, kernel, grid):
        key = (id(kernel), grid)
        if key not in self._cache:
            self._cache[key] = _kernel_matrix(kernel, grid)
        return self._cache[key]

    def running(self, grid, m):
        m = np.atleast_2d(np.asarray(m, dtype=float))
        x = grid.centers()
        out = []
        for k in range(self.n_populations):
            rows = self.kernels[k]
            z = np.stack([
                sum(self._mat(rows[j][i], grid) @ m[i]
                    for i in range(self.n_populations) if rows[j][i] is not None)
                if any(rows[j][i] is not None for i in range(self.n_populations))
                else np.zeros(grid.n_cells)
                for j in range(len(rows))
            ], axis=-1)
            out.append(self.f_outer[k](x, z))
        return _finite_or_raise(np.stack(out), "integral cost")

    def terminal(self, grid, m):
        if self.terminal_kernels is None:
            return np.zeros((self.n_populations, grid.n_cells))
        m = np.atleast_2d(np.asarray(m, dtype=float))
        x = grid.centers()
        out = []
        for k in range(self.n_populations):
            acc = np.zeros(grid.n_cells)
            for i in range(self.n_populations):
                ker = self.terminal_kernels[k][i]
                if ker is not None:
                    acc += self._mat(ker, grid) @ m[i]
            g1 = self.g1[k](x) if self.g1 else 1.0
            g2 = self.g2[k](x) if self.g2 else 0.0
            out.append(g1 * acc + g2)
        return _finite_or_raise(np.stack(out), "integral terminal cost")


class LocalCost(CostModel):
    """Pointwise costs F_k(x, m) = f_k(x, m(x)); terminal independent of m."""

    def __init__(self, n_populations: int, f_local, terminal_fields=None,
                 **constants):
        self.n_populations = n_populations
        self.f_local = f_local  # list of callables (x, m_at_x) -> values
        self._g = FixedCost._normalize(terminal_fields, n_populations)
        for name, val in constants.items():
            setattr(self, name, val)

    def running(self, grid, m):
        m = np.atleast_2d(np.asarray(m, dtype=float))
        x = grid.centers()
        m_at_x = m.T  # (n_cells, N)
        out = np.stack([f(x, m_at_x) for f in self.f_local])
        return _finite_or_raise(out, "local cost")

    def terminal(self, grid, m):
        x = grid.centers()
        return _finite_or_raise(np.stack([g(x) for g in self._g]), "terminal cost")


class MomentCost(CostModel):
    """Costs depending on the densities only through scalar moments.

    `weights` is a list of weight functions w_j(y); the moment table passed
    to each composition f_k(x, table) has shape (n_weights, N) with entries
    integral w_j(y) m_i(y) dy.
    """

    def __init__(self, n_populations: int, weights, f_compose,
                 g_compose=None, **constants):
        self.n_populations = n_populations
        self.weights = weights
        self.f_compose = f_compose
        self.g_compose = g_compose
        for name, val in constants.items():
            setattr(self, name, val)

    def moments(self, grid: Grid, m: np.ndarray) -> np.ndarray:
        m = np.atleast_2d(np.asarray(m, dtype=float))
        y = grid.centers()
        w = np.stack([np.asarray(wf(y), dtype=float) for wf in self.weights])
        return (w @ m.T) * grid.cell_volume  # (n_weights, N)

    def running(self, grid, m):
        table = self.moments(grid, m)
        x = grid.centers()
        out = np.stack([f(x, table) for f in self.f_compose])
        return _finite_or_raise(out, "moment cost")

    def terminal(self, grid, m):
        if self.g_compose is None:
            return np.zeros((self.n_populations, grid.n_cells))
        table = self.moments(grid, m)
        x = grid.centers()
        out = np.stack([g(x, table) for g in self.g_compose])
        return _finite_or_raise(out, "moment terminal cost")


def _stacked_l2_sq(grid: Grid, arr: np.ndarray) -> float:
    """Squared L2 norm summed over populations (and components, if any)."""
    a = np.asarray(arr, dtype=float)
    return float(np.sum(a * a) * grid.cell_volume)


def estimate_lipschitz(cost: CostModel, grid: Grid, sampler, n_pairs: int
                       ) -> tuple[float, float]:
    """Empirical lower bounds on the squared-L2 Lipschitz constants.

    Returns (L_F_hat, L_G_hat): maxima over sampled density pairs of
    ||F(., mu) - F(., nu)||_2^2 / ||mu - nu||_2^2 and of the same ratio
    with the spatial gradient of G in the numerator.
    """
    best_f = best_g = 0.0
    used = 0
    for _ in range(n_pairs):
        mu, nu = sampler.pair()
        denom = _stacked_l2_sq(grid, mu - nu)
        if denom == 0.0:
            continue
        used += 1
        df = cost.running(grid, mu) - cost.running(grid, nu)
        best_f = max(best_f, _stacked_l2_sq(grid, df) / denom)
        gm = cost.terminal(grid, mu)
        gn = cost.terminal(grid, nu)
        dgrad = np.stack([gradient(grid, gm[k] - gn[k])
                          for k in range(cost.n_populations)])
        best_g = max(best_g, _stacked_l2_sq(grid, dgrad) / denom)
    if used == 0:
        raise ValueError("all sampled pairs were degenerate")
    return best_f, best_g


@dataclass
class MonotonicityReport:
    monotone: bool
    min_pairing: float
    worst_pair: tuple[np.ndarray, np.ndarray] | None

    @property
    def verdict(self) -> str:
        return "monotone on samples" if self.monotone else "violation found"


def check_monotonicity(cost: CostModel, grid: Grid, sampler, n_pairs: int
                       ) -> MonotonicityReport:
    """Probe the crowd-aversion pairing of the running costs.

    Evaluates sum_k integral (F_k(x, mu) - F_k(x, nu)) (mu_k - nu_k) dx on
    sampled pairs; a negative value exhibits a monotonicity violation.
    """
    min_val = np.inf
    worst = None
    for _ in range(n_pairs):
        mu, nu = sampler.pair()
        if np.array_equal(mu, nu):
            continue
        df = cost.running(grid, mu) - cost.running(grid, nu)
        pairing = float(np.sum(df * (mu - nu)) * grid.cell_volume)
        if pairing < min_val:
            min_val = pairing
            worst = (mu, nu)
    return MonotonicityReport(monotone=min_val > 0, min_pairing=min_val,
                              worst_pair=worst)
