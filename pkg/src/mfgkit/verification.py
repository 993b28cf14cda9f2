"""Manufactured-solution convergence study for the backward solver.

Exact solution v(t, x) = A (1 + t) cos(pi xhat) on [a, b] (xhat the
normalized coordinate), quadratic Hamiltonian H = |p|^2 / 2, viscosity 1.
The forcing F = -dv/dt - Lap v + H(Dv) is supplied in closed form; the
study reports discretization errors at t = 0 under separate temporal and
spatial refinement, with dt tied to h^2 in the spatial branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Grid, TimeGrid, l2_norm
from .hamiltonians import ham_power
from .hjb import HJBProblem, solve_hjb_backward


def _exact(amplitude: float, t, xhat):
    return amplitude * (1.0 + t) * np.cos(np.pi * xhat)


def _make_problem(amplitude: float, n_cells: int, n_steps: int,
                  horizon: float) -> tuple[HJBProblem, np.ndarray]:
    grid = Grid(((0.0, 1.0),), (n_cells,))
    tg = TimeGrid(horizon, n_steps)
    a = amplitude

    def forcing(t, x):
        xh = x[:, 0]
        cos = np.cos(np.pi * xh)
        grad = -a * (1.0 + t) * np.pi * np.sin(np.pi * xh)
        f = -a * cos + a * (1.0 + t) * np.pi**2 * cos + 0.5 * grad**2
        return f[None, :]

    terminal = _exact(a, horizon, grid.axis_centers(0))[None, :]
    ham = ham_power(0.5, 0.0, 2.0)
    problem = HJBProblem(grid, tg, (1.0,), [ham], forcing=forcing,
                         terminal=terminal)
    exact0 = _exact(a, 0.0, grid.axis_centers(0))
    return problem, exact0


def _error_at_zero(amplitude, n_cells, n_steps, horizon) -> float:
    problem, exact0 = _make_problem(amplitude, n_cells, n_steps, horizon)
    v = solve_hjb_backward(problem)
    return l2_norm(problem.grid, v[0, 0] - exact0)


def observed_orders(errors: list[float], factors: list[float]) -> list[float]:
    """log-ratio convergence orders between consecutive refinements."""
    return [float(np.log(errors[i] / errors[i + 1]) / np.log(factors[i]))
            for i in range(len(errors) - 1)]


@dataclass
class MMSStudy:
    temporal_steps: list[int]
    temporal_errors: list[float]
    temporal_orders: list[float]
    spatial_cells: list[int]
    spatial_errors: list[float]
    spatial_orders: list[float]

    def to_dict(self) -> dict:
        return {
            "temporal": {"steps": self.temporal_steps,
                         "errors": self.temporal_errors,
                         "orders": self.temporal_orders},
            "spatial": {"cells": self.spatial_cells,
                        "errors": self.spatial_errors,
                        "orders": self.spatial_orders},
        }


def run_mms_study(amplitude: float = 0.05, horizon: float = 0.5,
                  temporal_steps=(8, 16, 32), temporal_cells: int = 64,
                  spatial_cells=(16, 32, 64)) -> MMSStudy:
    """Temporal refinement at fixed space, spatial refinement with dt ~ h^2.

    The amplitude is kept small enough that the CFL sub-stepping never
    triggers, so the nominal dt is the actual dt.
    """
    t_errors = [_error_at_zero(amplitude, temporal_cells, nt, horizon)
                for nt in temporal_steps]
    t_factors = [temporal_steps[i + 1] / temporal_steps[i]
                 for i in range(len(temporal_steps) - 1)]
    s_errors = []
    for nx in spatial_cells:
        h = 1.0 / nx
        nt = max(1, round(horizon / h**2))
        s_errors.append(_error_at_zero(amplitude, nx, nt, horizon))
    s_factors = [spatial_cells[i + 1] / spatial_cells[i]
                 for i in range(len(spatial_cells) - 1)]
    return MMSStudy(
        temporal_steps=list(temporal_steps), temporal_errors=t_errors,
        temporal_orders=observed_orders(t_errors, t_factors),
        spatial_cells=list(spatial_cells), spatial_errors=s_errors,
        spatial_orders=observed_orders(s_errors, s_factors))
