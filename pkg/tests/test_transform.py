import logging

import numpy as np
import pytest

from cgl_control.errors import DimensionError, InadmissiblePairError, ResolutionError
from cgl_control.models.params import Grid, PhysParams
from cgl_control.models.reports import Verdict
from cgl_control.numerics import transform
from cgl_control.numerics.kernel import build_kernel_table
from cgl_control.numerics.transform import (
    ProjectionWeights,
    admissibility_report,
    admissibility_sweep,
    apply_upsilon,
    build_k_matrix,
    build_projection,
    build_upsilon,
    eigen_basis,
    forward_transform,
    inverse_matrix,
    transform_matrix,
)


def operators(params, grid, weights=ProjectionWeights.TRAPEZOID):
    basis = eigen_basis(grid, params.n_modes)
    kmat = build_k_matrix(build_kernel_table(params, grid), grid)
    return basis, kmat, build_projection(basis, grid, weights)


class TestEigenBasis:
    def test_orthonormal(self, grid):
        basis = eigen_basis(grid, 4)
        gram = basis.e_matrix.T @ (grid.weights[:, None] * basis.e_matrix)
        np.testing.assert_allclose(gram, np.eye(4), atol=1e-3)

    def test_eigenvalues(self, grid):
        basis = eigen_basis(grid, 3)
        np.testing.assert_allclose(basis.lambdas, [np.pi**2 / 4, 9 * np.pi**2 / 4, 25 * np.pi**2 / 4])

    def test_too_coarse(self):
        with pytest.raises(ResolutionError):
            eigen_basis(Grid(n_x=5), 3)


class TestOperators:
    def test_k_matrix_is_lower_triangular(self, exp1_params, grid):
        _, kmat, _ = operators(exp1_params, grid)
        assert np.all(kmat.entries[0] == 0)
        assert np.all(np.triu(kmat.entries, 1) == 0)

    def test_projection_fixes_modes(self, exp1_params, grid):
        basis, _, proj = operators(exp1_params, grid)
        np.testing.assert_allclose(proj @ basis.e_matrix, basis.e_matrix, atol=1e-3)

    def test_forward_transform_shape_check(self, exp1_params, grid):
        _, kmat, proj = operators(exp1_params, grid)
        with pytest.raises(DimensionError):
            forward_transform(kmat, proj, np.ones(grid.n_x - 1))


class TestInverse:
    @pytest.mark.parametrize("weights", list(ProjectionWeights))
    def test_round_trip(self, exp1_params, grid, rng, weights):
        basis, kmat, proj = operators(exp1_params, grid, weights)
        w = rng.standard_normal(grid.n_x) + 1j * rng.standard_normal(grid.n_x)
        u = forward_transform(kmat, proj, w)
        upsilon_u, _ = apply_upsilon(kmat, basis, grid, u, weights)
        np.testing.assert_allclose(u - upsilon_u, w, atol=1e-9 * np.max(np.abs(w)))

    def test_dense_inverse(self, exp2_params, grid):
        basis, kmat, proj = operators(exp2_params, grid)
        upsilon, _ = build_upsilon(kmat, basis, grid)
        product = inverse_matrix(upsilon) @ transform_matrix(kmat, proj)
        np.testing.assert_allclose(product, np.eye(grid.n_x), atol=1e-9)

    def test_block_and_vector_agree(self, exp1_params, grid, rng):
        basis, kmat, _ = operators(exp1_params, grid)
        block = rng.standard_normal((grid.n_x, 3)) + 0j
        out, _ = apply_upsilon(kmat, basis, grid, block)
        single, _ = apply_upsilon(kmat, basis, grid, block[:, 1])
        np.testing.assert_allclose(out[:, 1], single, atol=1e-12)


class TestInverseProperties:
    @pytest.fixture(params=["exp1_params", "exp2_params"])
    def setup(self, request, grid):
        params = request.getfixturevalue(request.param)
        basis, kmat, proj = operators(params, grid)
        upsilon, _ = build_upsilon(kmat, basis, grid)
        return params, basis, kmat, proj, upsilon

    @pytest.fixture
    def fields(self, grid):
        rng = np.random.default_rng(2024)
        return rng.standard_normal((grid.n_x, 100)) + 1j * rng.standard_normal((grid.n_x, 100))

    def test_recursion_inverts_forward_transform(self, setup, grid, fields):
        _, basis, kmat, proj, _ = setup
        u = forward_transform(kmat, proj, fields)
        back = u - apply_upsilon(kmat, basis, grid, u)[0]
        errors = np.max(np.abs(back - fields), axis=0) / np.max(np.abs(fields), axis=0)
        assert errors.max() < 1e-8

    def test_two_sided_inverse(self, setup, grid):
        _, _, kmat, proj, upsilon = setup
        t_n = transform_matrix(kmat, proj).entries
        t_inv = inverse_matrix(upsilon).entries
        np.testing.assert_allclose(t_inv @ t_n, np.eye(grid.n_x), atol=1e-9)
        np.testing.assert_allclose(t_n @ t_inv, np.eye(grid.n_x), atol=1e-9)

    def test_matches_dense_solve(self, setup, fields):
        _, _, kmat, proj, upsilon = setup
        solved = np.linalg.solve(transform_matrix(kmat, proj).entries, fields)
        recursed = inverse_matrix(upsilon) @ fields
        assert np.max(np.abs(solved - recursed)) < 1e-8 * np.max(np.abs(fields))

    def test_upsilon_has_rank_n(self, setup):
        params, _, _, _, upsilon = setup
        sigma = np.linalg.svd(upsilon.entries, compute_uv=False)
        assert sigma[params.n_modes] < 1e-8 * sigma[0]
        assert sigma[params.n_modes - 1] > 1e-8 * sigma[0]


class TestAdmissibility:
    def test_experiment_one_denominators(self, exp1_params, fine_grid):
        report = admissibility_report(exp1_params, fine_grid)
        assert report.admissible
        d1, d2 = report.denominators
        assert d1.real == pytest.approx(-0.2628, abs=0.05)
        assert d1.imag == pytest.approx(0.8670, abs=0.05)
        assert d2.real == pytest.approx(0.6704, abs=0.05)
        assert d2.imag == pytest.approx(0.1703, abs=0.05)
        assert report.norm_transform > 1
        assert np.isfinite(report.norm_inverse)

    def test_experiment_two_denominator(self, exp2_params, fine_grid):
        (d1,) = admissibility_report(exp2_params, fine_grid).denominators
        assert d1.real == pytest.approx(0.4175, abs=0.05)
        assert d1.imag == pytest.approx(0.3746, abs=0.05)

    def test_zero_mu_is_trivially_admissible(self, grid):
        report = admissibility_report(PhysParams(nu=1.0, alpha=2.0, gamma=5.0, mu=0.0, n_modes=3), grid)
        assert report.admissible
        np.testing.assert_array_equal(report.denominators, [1, 1, 1])

    def test_denominators_continuous_in_mu(self, exp1_params, grid):
        base = np.array(admissibility_report(exp1_params, grid, with_norms=False).denominators)
        nudged = exp1_params.with_control(mu=exp1_params.mu * (1 + 1e-6))
        shifted = np.array(admissibility_report(nudged, grid, with_norms=False).denominators)
        assert np.max(np.abs(shifted - base)) < 1e-4

    def test_vanishing_denominator(self, exp1_params, grid, monkeypatch, caplog):
        # every |d_j| falls below a threshold of 10
        monkeypatch.setattr(transform, "ADMISSIBILITY_THRESHOLD", 10.0)
        with caplog.at_level(logging.WARNING):
            report = admissibility_report(exp1_params, grid)
        assert not report.admissible
        assert report.entries[0].verdict == Verdict.INADMISSIBLE
        assert report.entries[1].verdict == Verdict.UNDETERMINED
        assert report.norm_transform is None
        assert "inadmissible" in caplog.text

        basis, kmat, _ = operators(exp1_params, grid)
        with pytest.raises(InadmissiblePairError) as excinfo:
            apply_upsilon(kmat, basis, grid, np.ones(grid.n_x))
        assert excinfo.value.j == 1

    def test_sweep_outer_product(self, exp1_params, grid):
        reports = admissibility_sweep(exp1_params, grid, mus=[40.0, 60.0, 80.0], modes=[1, 2])
        assert len(reports) == 6
        assert [(r.mu, r.n_modes) for r in reports[:2]] == [(40.0, 1), (40.0, 2)]
        assert all(r.norm_transform is None for r in reports)

    def test_report_exports(self, exp1_params, grid):
        report = admissibility_report(exp1_params, grid)
        df = report.to_dataframe()
        assert list(df["j"]) == [1, 2]
        assert "verdict: admissible" in report.to_text()
