import numpy as np
import pytest

from cgl_control.errors import DimensionError
from cgl_control.models.params import Grid, TimeGrid
from cgl_control.numerics.discretization import derivative, inner, neumann_stencil, norm_h1, norm_l2, trapz
from cgl_control.numerics.transform import build_projection, eigen_basis


class TestGrids:
    def test_nodes_span_interval(self):
        grid = Grid(n_x=11, L=2.0)
        assert grid.nodes[0] == 0.0
        assert grid.nodes[-1] == 2.0
        assert grid.dx == pytest.approx(0.2)

    def test_weights_sum_to_length(self):
        grid = Grid(n_x=37, L=1.5)
        assert grid.weights.sum() == pytest.approx(1.5)

    def test_time_grid_from_step(self):
        tg = TimeGrid.from_step(dt=0.003, t_max=0.01)
        assert tg.dt <= 0.003
        assert tg.times[-1] == 0.01


class TestQuadrature:
    def test_trapz_exact_on_linear(self, grid):
        assert trapz(np.ones(grid.n_x), grid) == pytest.approx(1.0, abs=1e-14)
        assert trapz(grid.nodes, grid) == pytest.approx(0.5, abs=1e-14)

    def test_trapz_second_order(self, grid):
        value = trapz(np.sin(np.pi * grid.nodes), grid)
        assert abs(value - 2 / np.pi) < 1e-4

    def test_inner_conjugates_second_slot(self, grid, rng):
        f = rng.standard_normal(grid.n_x) + 1j * rng.standard_normal(grid.n_x)
        g = rng.standard_normal(grid.n_x) + 1j * rng.standard_normal(grid.n_x)
        assert inner(f, 1j * g, grid) == pytest.approx(-1j * inner(f, g, grid))
        assert inner(f, f, grid).real == pytest.approx(norm_l2(f, grid) ** 2)
        assert abs(inner(f, f, grid).imag) < 1e-14

    def test_shape_mismatch(self, grid):
        with pytest.raises(DimensionError):
            trapz(np.ones(grid.n_x + 1), grid)
        with pytest.raises(DimensionError):
            norm_l2(np.ones((grid.n_x, 2)), grid)


class TestDerivatives:
    def test_exact_on_quadratics(self, grid):
        d = derivative(grid.nodes**2, grid)
        np.testing.assert_allclose(d, 2 * grid.nodes, atol=1e-10)

    def test_neumann_stencil_exact_on_quadratics(self, grid):
        assert neumann_stencil(grid.nodes**2, grid.dx) == pytest.approx(2.0, abs=1e-10)

    def test_h1_of_first_eigenmode(self, grid):
        e1 = np.sqrt(2) * np.sin(np.pi * grid.nodes / 2)
        assert norm_l2(e1, grid) == pytest.approx(1.0, rel=1e-3)
        assert norm_h1(e1, grid) ** 2 == pytest.approx(1 + np.pi**2 / 4, rel=1e-3)

    def test_poincare(self, grid):
        # f(0) = 0 gives lambda_1 ||f||^2 <= ||f'||^2
        f = grid.nodes * (2 - grid.nodes)
        l2 = norm_l2(f, grid)
        d2 = norm_h1(f, grid) ** 2 - l2**2
        assert np.pi**2 / 4 * l2**2 <= d2

    @pytest.mark.parametrize("n_modes", [1, 2])
    def test_projected_poincare(self, grid, n_modes):
        # ||w - P_N w||^2 <= ||w'||^2 / lambda_{N+1} for w(0) = 0, w'(L) = 0
        rng = np.random.default_rng(77)
        modes = eigen_basis(grid, 12)
        proj = build_projection(eigen_basis(grid, n_modes), grid).entries
        lam_next = modes.lambdas[n_modes]

        worst = -np.inf
        for _ in range(200):
            coeffs = (rng.standard_normal(12) + 1j * rng.standard_normal(12)) / np.arange(1, 13)
            w = modes.e_matrix @ coeffs
            lhs = norm_l2(w - proj @ w, grid) ** 2
            rhs = norm_l2(derivative(w, grid), grid) ** 2 / lam_next
            worst = max(worst, lhs - rhs)
        assert worst <= 1e-3
