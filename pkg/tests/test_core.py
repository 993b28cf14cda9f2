"""Grid, field, quadrature and operator tests."""

import numpy as np
import pytest

from mfgkit.core import (Field, Grid, TimeGrid, Trajectory, gradient,
                         integrate, l2_norm, linf_norm, neumann_laplacian)


@pytest.fixture
def grid1d():
    return Grid(((0.0, 1.0),), (100,))


@pytest.fixture
def grid2d():
    return Grid(((0.0, 1.0), (0.0, 2.0)), (20, 30))


class TestGrid:
    def test_basic_properties(self, grid1d, grid2d):
        assert grid1d.dim == 1
        assert grid1d.spacing == (0.01,)
        assert grid1d.n_cells == 100
        assert grid2d.dim == 2
        assert grid2d.n_cells == 600
        assert grid2d.cell_volume == pytest.approx((1 / 20) * (2 / 30))
        assert grid2d.volume == 2.0

    def test_cell_volumes_tile_the_box(self, grid2d):
        assert grid2d.n_cells * grid2d.cell_volume == pytest.approx(
            grid2d.volume, abs=1e-14)

    def test_centers_inside_box(self, grid2d):
        c = grid2d.centers()
        assert c.shape == (600, 2)
        assert np.all(c[:, 0] > 0) and np.all(c[:, 0] < 1)
        assert np.all(c[:, 1] > 0) and np.all(c[:, 1] < 2)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            Grid(((0.0, 1.0),), (2,))
        with pytest.raises(ValueError):
            Grid(((1.0, 1.0),), (10,))
        with pytest.raises(ValueError):
            Grid(((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), (4, 4, 4))
        with pytest.raises(ValueError):
            Grid(((0.0, 1.0), (0.0, 1.0)), (4,))


class TestTimeGrid:
    def test_dt_and_times(self):
        tg = TimeGrid(0.5, 5)
        assert tg.dt == pytest.approx(0.1)
        assert tg.times[0] == 0.0
        assert tg.times[-1] == 0.5

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            TimeGrid(0.0, 10)
        with pytest.raises(ValueError):
            TimeGrid(1.0, 0)


class TestFieldAndTrajectory:
    def test_shape_validation(self, grid1d):
        with pytest.raises(ValueError):
            Field(grid1d, np.zeros(99))
        with pytest.raises(ValueError):
            Field(grid1d, np.full(100, np.nan))
        tg = TimeGrid(1.0, 3)
        with pytest.raises(ValueError):
            Trajectory(tg, grid1d, np.zeros((3, 100)))
        traj = Trajectory(tg, grid1d, np.zeros((4, 100)))
        assert traj.at(2).values.shape == (100,)


class TestGradient:
    def test_constant_field_has_zero_gradient(self, grid1d, grid2d):
        for g in (grid1d, grid2d):
            out = gradient(g, np.full(g.n_cells, 3.7))
            assert np.max(np.abs(out)) == 0.0

    def test_linear_field_1d(self, grid1d):
        # f(x) = x: interior slope 1; at end cells the ghost reflection
        # replaces the outside neighbor with the boundary cell itself, so
        # the 3-point stencil yields half the interior slope.
        x = grid1d.centers()[:, 0]
        out = gradient(grid1d, x)[:, 0]
        assert out[1:-1] == pytest.approx(1.0, abs=1e-13)
        assert out[0] == pytest.approx(0.5, abs=1e-13)
        assert out[-1] == pytest.approx(0.5, abs=1e-13)

    def test_axis_separation_2d(self, grid2d):
        c = grid2d.centers()
        out = gradient(grid2d, c[:, 1])
        assert np.max(np.abs(out[:, 0])) == 0.0
        interior = grid2d.reshape(out[:, 1])[:, 1:-1]
        assert interior == pytest.approx(1.0, abs=1e-13)


class TestQuadratureAndNorms:
    def test_zero_field(self, grid1d):
        assert integrate(grid1d, np.zeros(100)) == 0.0

    def test_linear_field_midpoint_exact(self, grid1d):
        x = grid1d.centers()[:, 0]
        assert integrate(grid1d, x) == pytest.approx(0.5, abs=1e-14)

    def test_linearity(self, grid2d):
        rng = np.random.default_rng(7)
        f = rng.normal(size=grid2d.n_cells)
        g = rng.normal(size=grid2d.n_cells)
        a, b = 2.5, -1.25
        assert integrate(grid2d, a * f + b * g) == pytest.approx(
            a * integrate(grid2d, f) + b * integrate(grid2d, g), abs=1e-12)

    def test_norm_examples(self, grid1d):
        ones = np.ones(100)
        assert l2_norm(grid1d, ones) == pytest.approx(1.0, abs=1e-14)
        assert linf_norm(grid1d, ones) == 1.0
        assert l2_norm(grid1d, 3.0 * ones) == pytest.approx(3.0, abs=1e-13)
        half = np.zeros(100)
        half[:50] = 1.0
        assert l2_norm(grid1d, half) == pytest.approx(np.sqrt(0.5), abs=1e-14)


class TestNeumannLaplacian:
    def test_constant_in_kernel(self, grid1d, grid2d):
        for g in (grid1d, grid2d):
            lap = neumann_laplacian(g)
            # entries scale like 1/h^2, so allow rounding at that magnitude
            scale = max(1.0 / h**2 for h in g.spacing)
            assert np.max(np.abs(lap @ np.ones(g.n_cells))) < 1e-12 * scale

    def test_symmetric_positive_semidefinite(self, grid2d):
        lap = neumann_laplacian(grid2d).toarray()
        assert np.max(np.abs(lap - lap.T)) == 0.0
        eigs = np.linalg.eigvalsh(lap)
        assert eigs.min() > -1e-10

    def test_matches_second_difference_interior(self, grid1d):
        x = grid1d.centers()[:, 0]
        f = np.cos(np.pi * x)
        lap = neumann_laplacian(grid1d)
        out = (lap @ f)
        # -Lap cos(pi x) = pi^2 cos(pi x) up to O(h^2)
        exact = np.pi**2 * f
        assert np.max(np.abs(out - exact)) < 1e-2

    def test_divergence_theorem_row_sums(self, grid2d):
        # zero row sums of the transpose = zero net flux out of the box
        lap = neumann_laplacian(grid2d)
        assert np.max(np.abs(np.asarray(lap.sum(axis=1)).ravel())) < 1e-12
