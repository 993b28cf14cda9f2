"""Backward solver for the Hamilton-Jacobi-Bellman equations.

Semi-implicit (IMEX) time stepping from the terminal condition: the
diffusion is treated implicitly through the Neumann Laplacian, the
Hamiltonian explicitly at the previous backward step's gradient.  Each step
is one symmetric positive-definite sparse solve; a CFL-type bound
dt <= h / max|D_pH| is enforced by sub-stepping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .core import Grid, TimeGrid, gradient, neumann_laplacian
from .costs import CostModel
from .hamiltonians import HamiltonianModel

SOLVER_TOL = 1e-12
MAX_SUBSTEPS = 1_000_000


class SolverError(RuntimeError):
    """Hard numerical failure inside a time march."""


@dataclass
class HJBProblem:
    """Data for one backward solve with a frozen density trajectory.

    Either (`cost`, `density`) or (`forcing`, `terminal`) must be provided;
    the explicit pair is used for manufactured-solution studies where the
    right-hand side depends on time directly.
    """

    grid: Grid
    time_grid: TimeGrid
    viscosities: tuple[float, ...]
    hamiltonians: list[HamiltonianModel]
    cost: CostModel | None = None
    density: np.ndarray | None = None  # (steps + 1, N, n_cells)
    forcing: object | None = None      # callable (t, x) -> (N, n_cells)
    terminal: np.ndarray | None = None  # (N, n_cells)

    def __post_init__(self):
        self.viscosities = tuple(float(nu) for nu in self.viscosities)
        if any(nu <= 0 for nu in self.viscosities):
            raise ValueError("viscosities must be positive")
        if len(self.hamiltonians) != self.n_populations:
            raise ValueError("one Hamiltonian per population is required")
        if self.cost is None and (self.forcing is None or self.terminal is None):
            raise ValueError("provide a cost model or explicit forcing+terminal")
        if self.cost is not None and self.density is None:
            raise ValueError("a cost model requires a frozen density trajectory")
        if self.density is not None:
            self.density = np.asarray(self.density, dtype=float)
            expected = (self.time_grid.steps + 1, self.n_populations,
                        self.grid.n_cells)
            if self.density.shape != expected:
                raise ValueError(
                    f"density trajectory shape {self.density.shape} != {expected}")

    @property
    def n_populations(self) -> int:
        return len(self.viscosities)

    def rhs_at(self, j: int) -> np.ndarray:
        """Running cost fields at time index j, shape (N, n_cells)."""
        if self.forcing is not None:
            t = self.time_grid.times[j]
            return np.asarray(self.forcing(t, self.grid.centers()), dtype=float)
        return self.cost.running(self.grid, self.density[j])

    def terminal_values(self) -> np.ndarray:
        if self.terminal is not None:
            return np.asarray(self.terminal, dtype=float)
        return self.cost.terminal(self.grid, self.density[-1])


class _ImplicitDiffusion:
    """Cache of LU factorizations of I + dt * nu * L_N per (nu, dt)."""

    def __init__(self, grid: Grid):
        self.lap = neumann_laplacian(grid)
        self.eye = sp.identity(grid.n_cells, format="csr")
        self._cache: dict[tuple[float, float], object] = {}

    def solve(self, nu: float, dt: float, rhs: np.ndarray,
              step: int) -> np.ndarray:
        key = (nu, dt)
        if key not in self._cache:
            mat = (self.eye + dt * nu * self.lap).tocsc()
            self._cache[key] = (splu(mat), mat)
        lu, mat = self._cache[key]
        sol = lu.solve(rhs)
        resid = np.max(np.abs(mat @ sol - rhs))
        if not np.isfinite(resid) or resid > SOLVER_TOL * (1.0 + np.max(np.abs(rhs))):
            raise SolverError(f"linear solve failed at step {step}: "
                              f"residual {resid:.3e}")
        return sol


def solve_hjb_backward(problem: HJBProblem) -> np.ndarray:
    """March the N value functions backward from t = T to t = 0.

    Returns the value trajectories as an array of shape
    (steps + 1, N, n_cells); the terminal slice equals the terminal cost
    exactly.
    """
    grid, tg = problem.grid, problem.time_grid
    x = grid.centers()
    h_min = min(grid.spacing)
    diffusion = _ImplicitDiffusion(grid)
    n_t = tg.steps
    npop = problem.n_populations
    v = np.empty((n_t + 1, npop, grid.n_cells))
    v[n_t] = problem.terminal_values()

    for j in range(n_t - 1, -1, -1):
        f_rhs = problem.rhs_at(j + 1)
        for k in range(npop):
            ham = problem.hamiltonians[k]
            nu = problem.viscosities[k]
            w = v[j + 1, k]
            dv = gradient(grid, w)
            drift = ham.grad_p(x, dv)
            cfl = float(np.max(np.abs(drift))) / h_min
            if not np.isfinite(cfl) or tg.dt * cfl > MAX_SUBSTEPS:
                raise SolverError(f"drift magnitude blew up at step {j}, "
                                  f"population {k}: CFL rate {cfl:.3e}")
            n_sub = max(1, ceil(tg.dt * cfl))
            dt_sub = tg.dt / n_sub
            for s in range(n_sub):
                if s > 0:
                    dv = gradient(grid, w)
                hval = ham.hamiltonian(x, dv)
                if not np.all(np.isfinite(hval)):
                    raise SolverError(f"non-finite Hamiltonian at step {j}, "
                                      f"population {k}")
                rhs = w + dt_sub * (f_rhs[k] - hval)
                w = diffusion.solve(nu, dt_sub, rhs, j)
            v[j, k] = w
    return v


def hjb_residual(v: np.ndarray, problem: HJBProblem) -> np.ndarray:
    """Discrete residual of the backward equation at time indices 0..n_t-1.

    Uses backward time differences, the Neumann Laplacian stencil, and the
    Hamiltonian at the local gradient; for reporting only.
    """
    grid, tg = problem.grid, problem.time_grid
    x = grid.centers()
    lap = neumann_laplacian(grid)
    n_t = tg.steps
    npop = problem.n_populations
    out = np.empty((n_t, npop, grid.n_cells))
    for j in range(n_t):
        f_rhs = problem.rhs_at(j)
        for k in range(npop):
            w = v[j, k]
            dv = gradient(grid, w)
            hval = problem.hamiltonians[k].hamiltonian(x, dv)
            out[j, k] = (-(v[j + 1, k] - w) / tg.dt
                         + problem.viscosities[k] * (lap @ w)
                         + hval - f_rhs[k])
    return out
