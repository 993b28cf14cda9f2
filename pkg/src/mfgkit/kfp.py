"""Forward mass-conservative solver for the Kolmogorov-Fokker-Planck equations.

Finite-volume flux form on the cell-centered grid: diffusive face fluxes
nu (m_R - m_L) / h plus first-order upwinded drift fluxes, zero total flux
through boundary faces, implicit Euler in time.  The generator matrix has
zero column sums (exact mass conservation) and an M-matrix structure
(positivity).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .core import Grid, TimeGrid
from .hjb import SOLVER_TOL, SolverError

NEGATIVITY_TOL = 1e-12


@dataclass
class KFPProblem:
    """Forward transport-diffusion data with a frozen drift trajectory.

    `drift` holds the momentum-gradient field D_pH_k(x, Dv_k(t, x)) per
    population and time point, shape (steps + 1, N, n_cells, dim); the
    densities are transported with velocity minus that field.
    """

    grid: Grid
    time_grid: TimeGrid
    viscosities: tuple[float, ...]
    drift: np.ndarray
    m0: np.ndarray  # (N, n_cells)

    def __post_init__(self):
        self.viscosities = tuple(float(nu) for nu in self.viscosities)
        if any(nu <= 0 for nu in self.viscosities):
            raise ValueError("viscosities must be positive")
        self.drift = np.asarray(self.drift, dtype=float)
        self.m0 = np.atleast_2d(np.asarray(self.m0, dtype=float))
        expected = (self.time_grid.steps + 1, self.n_populations,
                    self.grid.n_cells, self.grid.dim)
        if self.drift.shape != expected:
            raise ValueError(f"drift shape {self.drift.shape} != {expected}")
        if not np.all(np.isfinite(self.drift)):
            raise ValueError("drift contains non-finite values")
        report = validate_initial(self.m0, self.drift[0], self.grid)
        if not report.accepted:
            raise ValueError(report.message)

    @property
    def n_populations(self) -> int:
        return len(self.viscosities)


@dataclass
class InitialDataReport:
    accepted: bool
    message: str
    masses: np.ndarray
    min_value: float
    compatibility_residual: float


def _boundary_compatibility(grid: Grid, m0: np.ndarray,
                            drift0: np.ndarray) -> float:
    """Max over boundary faces of |d_n m0 + m0 b.n| (one-sided differences)."""
    worst = 0.0
    for k in range(m0.shape[0]):
        mk = m0[k].reshape(grid.cells)
        bk = drift0[k].reshape(grid.cells + (grid.dim,))
        for axis in range(grid.dim):
            h = grid.spacing[axis]
            lo_m = mk.take([0, 1], axis=axis)
            # outward normal at the low wall is -e_axis
            dn_lo = -(lo_m.take(1, axis=axis) - lo_m.take(0, axis=axis)) / h
            res_lo = dn_lo - mk.take(0, axis=axis) * bk.take(0, axis=axis)[..., axis]
            hi_m = mk.take([-2, -1], axis=axis)
            dn_hi = (hi_m.take(1, axis=axis) - hi_m.take(0, axis=axis)) / h
            res_hi = dn_hi + mk.take(-1, axis=axis) * bk.take(-1, axis=axis)[..., axis]
            worst = max(worst, float(np.max(np.abs(res_lo))),
                        float(np.max(np.abs(res_hi))))
    return worst


def validate_initial(m0: np.ndarray, drift_at_0: np.ndarray,
                     grid: Grid) -> InitialDataReport:
    """Check m0 is a valid density vector and report boundary compatibility.

    The compatibility residual is informational: the finite-volume scheme
    imposes zero boundary flux regardless.
    """
    m0 = np.atleast_2d(np.asarray(m0, dtype=float))
    drift_at_0 = np.asarray(drift_at_0, dtype=float)
    masses = m0.sum(axis=1) * grid.cell_volume
    min_value = float(np.min(m0))
    if min_value < -1e-12:
        return InitialDataReport(False, "initial density has negative cells",
                                 masses, min_value, np.nan)
    if np.max(np.abs(masses - 1.0)) > 1e-6:
        return InitialDataReport(False, f"initial masses {masses} deviate from 1",
                                 masses, min_value, np.nan)
    accepted_tightly = np.max(np.abs(masses - 1.0)) <= 1e-10
    residual = _boundary_compatibility(grid, m0, drift_at_0)
    msg = "ok" if accepted_tightly else "mass deviation above 1e-10 (tolerated)"
    return InitialDataReport(True, msg, masses, min_value, residual)


def transport_generator(grid: Grid, nu: float, drift: np.ndarray) -> sp.csr_matrix:
    """Flux-form generator S with dm/dt = S m for one population.

    Diffusive part is the Neumann Laplacian; the drift part upwinds the
    donor cell by the sign of the face-averaged drift (mass moves opposite
    to the drift field, matching div(b m) with b = D_pH).  Columns of S sum
    to zero, so implicit Euler conserves mass exactly.
    """
    n = grid.n_cells
    shape = grid.cells
    b = drift.reshape(shape + (grid.dim,))
    idx = np.arange(n).reshape(shape)
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(v.ravel())

    for axis in range(grid.dim):
        h = grid.spacing[axis]
        left = idx.take(range(0, shape[axis] - 1), axis=axis)
        right = idx.take(range(1, shape[axis]), axis=axis)
        b_face = 0.5 * (b.take(range(0, shape[axis] - 1), axis=axis)[..., axis]
                        + b.take(range(1, shape[axis]), axis=axis)[..., axis])
        # diffusion: rate nu / h^2 between neighbors
        d = np.full(b_face.shape, nu / h**2)
        add(left, right, d)
        add(right, left, d)
        add(left, left, -d)
        add(right, right, -d)
        # upwind drift: for b_face > 0 the term +div(b m) moves mass from
        # the right cell into the left one, and conversely for b_face < 0
        bp = np.maximum(b_face, 0.0) / h
        bm = np.minimum(b_face, 0.0) / h
        add(left, right, bp)
        add(right, right, -bp)
        add(right, left, -bm)
        add(left, left, bm)

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def solve_kfp_forward(problem: KFPProblem) -> np.ndarray:
    """March the N densities forward with implicit Euler.

    Returns density trajectories of shape (steps + 1, N, n_cells); every
    slice is nonnegative (up to 1e-12) with unit mass.  Consecutive steps
    with identical drift fields reuse the LU factorization.
    """
    grid, tg = problem.grid, problem.time_grid
    n_t = tg.steps
    npop = problem.n_populations
    eye = sp.identity(grid.n_cells, format="csc")
    m = np.empty((n_t + 1, npop, grid.n_cells))
    m[0] = problem.m0
    for k in range(npop):
        nu = problem.viscosities[k]
        lu = None
        mat = None
        prev_drift = None
        for j in range(n_t):
            d = problem.drift[j + 1, k]
            if lu is None or not np.array_equal(d, prev_drift):
                gen = transport_generator(grid, nu, d)
                mat = (eye - tg.dt * gen).tocsc()
                lu = splu(mat)
                prev_drift = d
            rhs = m[j, k]
            sol = lu.solve(rhs)
            resid = np.max(np.abs(mat @ sol - rhs))
            if not np.isfinite(resid) or resid > SOLVER_TOL * (1.0 + np.max(np.abs(rhs))):
                raise SolverError(f"KFP linear solve failed at step {j}: "
                                  f"residual {resid:.3e}")
            if np.min(sol) < -NEGATIVITY_TOL:
                raise SolverError(
                    f"negative density {np.min(sol):.3e} at step {j}: "
                    "transport matrix lost its M-matrix structure")
            m[j + 1, k] = sol
    return m
