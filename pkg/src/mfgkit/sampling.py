"""Reproducible sampler of probability-density vectors on a grid.

Produces a diverse family for probing Lipschitz constants, monotonicity and
fixed-point uniqueness: uniform densities, normalized Gaussian bumps with
random center/width, convex mixtures, and clipped perturbations of the
uniform density.  Every draw is projected onto the probability simplex by
clipping at zero and renormalizing.
"""

from __future__ import annotations

import numpy as np

from .core import Grid


def project_to_simplex(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Clip at zero and renormalize each row to unit mass."""
    v = np.maximum(np.atleast_2d(np.asarray(values, dtype=float)), 0.0)
    masses = v.sum(axis=1) * grid.cell_volume
    if np.any(masses <= 0):
        raise ValueError("cannot normalize a nonpositive density")
    return v / masses[:, None]


def uniform_density(grid: Grid) -> np.ndarray:
    return np.full(grid.n_cells, 1.0 / grid.volume)


class DensitySampler:
    """Fixed-seed generator of density vectors in P_N(Omega)."""

    def __init__(self, grid: Grid, n_populations: int, seed: int):
        self.grid = grid
        self.n_populations = n_populations
        self.rng = np.random.default_rng(seed)
        self._x = grid.centers()
        self._widths = np.array([b - a for a, b in grid.extents])
        self._lo = np.array([a for a, _ in grid.extents])

    def _bump(self) -> np.ndarray:
        center = self._lo + self.rng.uniform(0.1, 0.9, self.grid.dim) * self._widths
        width = self.rng.uniform(0.05, 0.4) * self._widths.min()
        r2 = np.sum((self._x - center) ** 2, axis=1)
        return np.exp(-0.5 * r2 / width**2)

    def _component(self) -> np.ndarray:
        kind = self.rng.integers(0, 4)
        u = uniform_density(self.grid)
        if kind == 0:
            return u
        if kind == 1:
            return self._bump()
        if kind == 2:
            lam = self.rng.uniform(0.0, 1.0)
            b = project_to_simplex(self.grid, self._bump())[0]
            return lam * u + (1 - lam) * b
        noise = self.rng.normal(0.0, 0.5, self.grid.n_cells)
        return u * (1.0 + noise)

    def density(self) -> np.ndarray:
        """One density vector, shape (N, n_cells)."""
        rows = [self._component() for _ in range(self.n_populations)]
        return project_to_simplex(self.grid, np.stack(rows))

    def pair(self) -> tuple[np.ndarray, np.ndarray]:
        return self.density(), self.density()
