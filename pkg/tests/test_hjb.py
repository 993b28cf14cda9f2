"""Backward value-function solver: exactness, convergence, comparison."""

import numpy as np
import pytest

from mfgkit.core import Grid, TimeGrid, l2_norm
from mfgkit.hamiltonians import HamiltonianModel, ham_power
from mfgkit.hjb import HJBProblem, SolverError, hjb_residual, solve_hjb_backward
from mfgkit.verification import observed_orders, run_mms_study


def _zero_hamiltonian():
    return ham_power(0.0, 0.0, 2.0)


def _make_problem(grid, tg, forcing, terminal, ham=None, nu=1.0):
    return HJBProblem(grid, tg, (nu,), [ham or ham_power(0.5, 0.0, 2.0)],
                      forcing=forcing, terminal=terminal)


@pytest.fixture
def grid():
    return Grid(((0.0, 1.0),), (64,))


class TestExactCases:
    def test_constant_solution_reproduced_exactly(self, grid):
        # H(., 0) = 0, F = 0, G = c: the constant is a fixed point of every
        # implicit step, so the march keeps it to solver precision
        tg = TimeGrid(1.0, 20)
        c = 2.5
        problem = _make_problem(
            grid, tg, lambda t, x: np.zeros((1, x.shape[0])),
            np.full((1, grid.n_cells), c))
        v = solve_hjb_backward(problem)
        assert np.max(np.abs(v - c)) < 1e-12

    def test_terminal_slice_is_exact(self, grid):
        tg = TimeGrid(0.3, 10)
        terminal = np.cos(np.pi * grid.centers()[:, 0])[None, :]
        problem = _make_problem(
            grid, tg, lambda t, x: np.zeros((1, x.shape[0])), terminal)
        v = solve_hjb_backward(problem)
        assert np.array_equal(v[-1], terminal)

    def test_constant_residual_is_zero(self, grid):
        tg = TimeGrid(1.0, 10)
        problem = _make_problem(
            grid, tg, lambda t, x: np.zeros((1, x.shape[0])),
            np.full((1, grid.n_cells), 1.0))
        v = np.ones((11, 1, grid.n_cells))
        res = hjb_residual(v, problem)
        assert np.max(np.abs(res)) == 0.0


class TestHeatEquation:
    def _error(self, n_cells, n_steps, T=0.2):
        grid = Grid(((0.0, 1.0),), (n_cells,))
        tg = TimeGrid(T, n_steps)
        x = grid.centers()[:, 0]
        terminal = np.cos(np.pi * x)[None, :]
        problem = _make_problem(
            grid, tg, lambda t, xx: np.zeros((1, xx.shape[0])), terminal,
            ham=_zero_hamiltonian())
        v = solve_hjb_backward(problem)
        exact0 = np.exp(-np.pi**2 * T) * np.cos(np.pi * x)
        return l2_norm(grid, v[0, 0] - exact0)

    def test_eigenfunction_decay(self):
        assert self._error(64, 400) < 1e-3

    def test_temporal_refinement_first_order(self):
        errs = [self._error(64, n) for n in (50, 100, 200)]
        orders = observed_orders(errs, [2.0, 2.0])
        assert all(0.8 <= o <= 1.3 for o in orders)


class TestManufacturedSolution:
    def test_orders_within_brackets(self):
        study = run_mms_study()
        assert all(0.8 <= o <= 1.3 for o in study.temporal_orders)
        assert all(1.7 <= o <= 2.3 for o in study.spatial_orders)

    def test_residual_shrinks_under_refinement(self):
        from mfgkit.verification import _make_problem as make_mms

        norms = []
        for n_cells, n_steps in ((32, 128), (64, 512)):
            problem, _ = make_mms(0.05, n_cells, n_steps, 0.5)
            v = solve_hjb_backward(problem)
            res = hjb_residual(v, problem)
            norms.append(float(np.max(np.abs(res))))
        assert norms[1] < norms[0]


class TestComparisonPrinciple:
    def test_ordered_data_order_preserved(self, grid):
        # H = 0 makes each step a monotone linear solve, so ordered forcing
        # and terminal data produce ordered value functions exactly
        tg = TimeGrid(0.5, 40)
        rng = np.random.default_rng(12)
        f_lo = rng.uniform(-1.0, 0.0, grid.n_cells)
        f_gap = rng.uniform(0.0, 1.0, grid.n_cells)
        g_lo = rng.uniform(-1.0, 0.0, grid.n_cells)
        g_gap = rng.uniform(0.0, 1.0, grid.n_cells)

        def solve(f, g):
            problem = _make_problem(
                grid, tg, lambda t, x: f[None, :], g[None, :],
                ham=_zero_hamiltonian())
            return solve_hjb_backward(problem)

        v1 = solve(f_lo, g_lo)
        v2 = solve(f_lo + f_gap, g_lo + g_gap)
        assert np.min(v2 - v1) >= -1e-12


class TestStability:
    def test_cfl_substepping_keeps_steep_data_finite(self, grid):
        # steep terminal data with a large nominal dt forces sub-stepping
        tg = TimeGrid(1.0, 5)
        x = grid.centers()[:, 0]
        terminal = 5.0 * np.cos(3 * np.pi * x)[None, :]
        problem = _make_problem(
            grid, tg, lambda t, xx: np.zeros((1, xx.shape[0])), terminal)
        v = solve_hjb_backward(problem)
        assert np.all(np.isfinite(v))
        # the nonnegative Hamiltonian only pulls values down, so the upper
        # envelope of the terminal data is never exceeded
        assert np.max(v[0]) <= np.max(terminal) + 1e-9

    def test_nonfinite_hamiltonian_raises(self, grid):
        class Exploding(HamiltonianModel):
            def hamiltonian(self, x, p):
                return np.full(np.atleast_2d(p).shape[0], np.inf)

            def grad_p(self, x, p):
                return np.zeros_like(np.atleast_2d(p))

        tg = TimeGrid(0.1, 5)
        problem = HJBProblem(grid, tg, (1.0,), [Exploding()],
                             forcing=lambda t, x: np.zeros((1, x.shape[0])),
                             terminal=np.zeros((1, grid.n_cells)))
        with pytest.raises(SolverError):
            solve_hjb_backward(problem)


class TestProblemValidation:
    def test_requires_cost_or_forcing(self, grid):
        tg = TimeGrid(0.1, 5)
        with pytest.raises(ValueError):
            HJBProblem(grid, tg, (1.0,), [_zero_hamiltonian()])

    def test_rejects_mismatched_density_shape(self, grid):
        from mfgkit.costs import FixedCost

        tg = TimeGrid(0.1, 5)
        with pytest.raises(ValueError):
            HJBProblem(grid, tg, (1.0,), [_zero_hamiltonian()],
                       cost=FixedCost(1), density=np.zeros((3, 1, 10)))

    def test_rejects_nonpositive_viscosity(self, grid):
        tg = TimeGrid(0.1, 5)
        with pytest.raises(ValueError):
            HJBProblem(grid, tg, (0.0,), [_zero_hamiltonian()],
                       forcing=lambda t, x: np.zeros((1, x.shape[0])),
                       terminal=np.zeros((1, grid.n_cells)))
