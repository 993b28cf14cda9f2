"""Grids, discrete fields and differential operators with Neumann boundaries.

Everything here is cell-centered finite-volume on axis-aligned boxes in 1D
or 2D.  The homogeneous Neumann condition is imposed by ghost-cell
reflection (the ghost value equals the adjacent interior value), which makes
gradients of constants vanish exactly, keeps the Laplacian symmetric, and
lets the transport scheme in :mod:`mfgkit.kfp` conserve mass to machine
precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on a box in 1 or 2 dimensions.

    Parameters
    ----------
    extents : tuple of (lo, hi) pairs
        One interval per axis.
    cells : tuple of int
        Cells per axis, each >= 3.

    Field values live at cell centers, flattened in C order for 2D
    (axis 0 slowest).
    """

    extents: tuple[tuple[float, float], ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        extents = tuple((float(a), float(b)) for a, b in self.extents)
        cells = tuple(int(n) for n in self.cells)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "cells", cells)
        if len(extents) != len(cells):
            raise ValueError("extents and cells must have the same length")
        if len(extents) not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")
        for (a, b), n in zip(extents, cells):
            if not b > a:
                raise ValueError(f"empty interval [{a}, {b}]")
            if n < 3:
                raise ValueError("at least 3 cells per axis are required")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((b - a) / n for (a, b), n in zip(self.extents, self.cells))

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        """Measure of the box."""
        return float(np.prod([b - a for a, b in self.extents]))

    def axis_centers(self, axis: int) -> np.ndarray:
        a, b = self.extents[axis]
        n = self.cells[axis]
        h = (b - a) / n
        return a + h * (np.arange(n) + 0.5)

    def centers(self) -> np.ndarray:
        """Cell-center coordinates, shape (n_cells, dim)."""
        axes = [self.axis_centers(i) for i in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def reshape(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values).reshape(self.cells)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, T] into `steps` intervals."""

    horizon: float
    steps: int

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.steps < 1:
            raise ValueError("at least one time step is required")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)


@dataclass(frozen=True)
class Field:
    """One scalar value per cell center of a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", values)
        if values.size != self.grid.n_cells:
            raise ValueError("value count does not match grid cell count")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")


@dataclass(frozen=True)
class Trajectory:
    """One field per time point: shape (steps + 1, n_cells)."""

    time_grid: TimeGrid
    grid: Grid
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        object.__setattr__(self, "data", data)
        expected = (self.time_grid.steps + 1, self.grid.n_cells)
        if data.shape != expected:
            raise ValueError(f"trajectory shape {data.shape} != {expected}")

    def at(self, j: int) -> Field:
        return Field(self.grid, self.data[j])


def gradient(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Central-difference gradient with Neumann ghost reflection.

    Returns an array of shape (n_cells, dim).  At boundary cells the ghost
    value is the reflected interior value, so the discrete normal derivative
    vanishes and the gradient of a constant field is identically zero.
    """
    f = np.asarray(values, dtype=float).reshape(grid.cells)
    out = np.empty(grid.cells + (grid.dim,))
    for axis in range(grid.dim):
        h = grid.spacing[axis]
        fwd = np.concatenate(
            [f.take(range(1, f.shape[axis]), axis=axis),
             f.take([-1], axis=axis)], axis=axis)
        bwd = np.concatenate(
            [f.take([0], axis=axis),
             f.take(range(0, f.shape[axis] - 1), axis=axis)], axis=axis)
        out[..., axis] = (fwd - bwd) / (2.0 * h)
    return out.reshape(grid.n_cells, grid.dim)


def integrate(grid: Grid, values: np.ndarray) -> float:
    """Midpoint quadrature: sum of cell values times cell volume."""
    return float(np.sum(np.asarray(values, dtype=float)) * grid.cell_volume)


def l2_norm(grid: Grid, values: np.ndarray) -> float:
    """Cell-volume-weighted discrete L2 norm."""
    v = np.asarray(values, dtype=float)
    return float(np.sqrt(np.sum(v * v) * grid.cell_volume))


def linf_norm(grid: Grid, values: np.ndarray) -> float:
    return float(np.max(np.abs(values)))


def neumann_laplacian(grid: Grid) -> sp.csr_matrix:
    """Matrix of minus the Neumann Laplacian (symmetric positive semidefinite).

    Row i of the returned matrix L satisfies (L f)_i = -(Delta_h f)_i with
    ghost-cell reflection at the walls; the constant vector is in its kernel.
    """
    blocks = []
    for axis in range(grid.dim):
        n = grid.cells[axis]
        h = grid.spacing[axis]
        main = np.full(n, 2.0)
        main[0] = main[-1] = 1.0
        off = -np.ones(n - 1)
        blocks.append(sp.diags([off, main, off], [-1, 0, 1]) / h**2)
    if grid.dim == 1:
        lap = blocks[0]
    else:
        n0, n1 = grid.cells
        lap = sp.kron(blocks[0], sp.identity(n1)) + sp.kron(sp.identity(n0), blocks[1])
    return sp.csr_matrix(lap)
