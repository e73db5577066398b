import logging

import numpy as np
import pytest

from cgl_control.control.controller import build_control_law, feedback, minimal_mode_plan
from cgl_control.errors import DimensionError, DomainError, NonConvergenceError, WindowError
from cgl_control.models.experiment import load_config
from cgl_control.models.params import Grid, PhysParams, TimeGrid
from cgl_control.numerics.discretization import neumann_stencil
from cgl_control.numerics.transform import build_k_matrix, build_projection, eigen_basis, forward_transform
from cgl_control.numerics.kernel import build_kernel_table
from cgl_control.processing.initial_data import exp1_profile, exp2_profile, sample_profile
from cgl_control.solvers.base import RunRecord
from cgl_control.solvers.crank_nicolson import (
    LinearCrankNicolson,
    PicardConfig,
    PicardCrankNicolson,
    SolverConfig,
    SystemMatrices,
    run,
    run_target,
    step_linear,
    step_nonlinear,
)
from cgl_control.solvers.decay import fit_decay_rate


def first_mode(grid: Grid) -> np.ndarray:
    return np.sqrt(2) * np.sin(np.pi * grid.nodes / 2) + 0j


class TestSystemMatrices:
    @pytest.mark.parametrize("n_x", [41, 121])
    def test_solution_satisfies_every_row(self, exp1_params, n_x, rng):
        grid = Grid(n_x=n_x)
        mats = SystemMatrices.assemble(exp1_params, grid, dt=1e-3)
        rhs = rng.standard_normal(n_x) + 1j * rng.standard_normal(n_x)
        u = mats.solve(rhs, dirichlet=0.3 - 0.1j, neumann=1.5 + 2j)

        assert u[0] == 0.3 - 0.1j
        assert neumann_stencil(u, grid.dx) == pytest.approx(1.5 + 2j, rel=1e-10)
        np.testing.assert_allclose((mats.lhs @ u)[1:-1], rhs[1:-1], rtol=1e-10, atol=1e-10)

    def test_banded_and_dense_agree(self, exp2_params, rng):
        grid = Grid(n_x=81)
        rhs = rng.standard_normal(grid.n_x) + 1j * rng.standard_normal(grid.n_x)
        banded = SystemMatrices.assemble(exp2_params, grid, 5e-4, SolverConfig(dense_threshold=0))
        dense = SystemMatrices.assemble(exp2_params, grid, 5e-4, SolverConfig(dense_threshold=10_000))
        np.testing.assert_allclose(banded.solve(rhs, 0, 1j), dense.solve(rhs, 0, 1j), rtol=1e-11, atol=1e-11)

    def test_matrix_free_matches_dense(self, exp1_params, grid, rng):
        mats = SystemMatrices.assemble(exp1_params, grid, 1e-3)
        u = rng.standard_normal(grid.n_x) + 1j * rng.standard_normal(grid.n_x)
        np.testing.assert_allclose(mats.apply_rhs(u), mats.rhs_op @ u, atol=1e-12)


class TestLinearStepper:
    def test_boundary_rows(self, exp1_params, grid, rng):
        law = build_control_law(exp1_params, grid)
        mats = SystemMatrices.assemble(exp1_params, grid, 1e-4)
        u = first_mode(grid) + 0.1 * rng.standard_normal(grid.n_x)
        u[0] = 0
        new = step_linear(u, mats, law)
        assert new[0] == 0
        # the Neumann datum is the feedback of the previous level
        assert neumann_stencil(new, grid.dx) == pytest.approx(feedback(law, u, grid), rel=1e-9)

    def test_heat_eigenmode_decay(self, heat_params, grid, short_time):
        record = LinearCrankNicolson(heat_params, grid, short_time).run(first_mode(grid))
        ratio = record.l2_history[-1] / record.l2_history[0]
        assert ratio == pytest.approx(np.exp(-np.pi**2 / 4 * 0.1), rel=1e-3)

    def test_unstable_eigenmode_growth(self, grid, short_time):
        params = PhysParams(nu=1.0, alpha=3.0, gamma=23.0)
        record = LinearCrankNicolson(params, grid, short_time).run(first_mode(grid))
        ratio = record.l2_history[-1] / record.l2_history[0]
        assert ratio == pytest.approx(np.exp((23.0 - np.pi**2 / 4) * 0.1), rel=2e-3)

    def test_record_layout(self, heat_params, grid, short_time):
        record = run(heat_params, grid, short_time, None, first_mode(grid))
        assert len(record) == short_time.n_t
        assert np.all(record.picard_iters == 0)
        assert np.all(record.feedback_history == 0)
        assert list(record.to_dataframe().columns) == ["t", "l2", "h1", "re_g", "im_g", "picard_iters"]

    def test_wrong_initial_shape(self, heat_params, grid, short_time):
        with pytest.raises(DimensionError):
            run(heat_params, grid, short_time, None, np.zeros(grid.n_x + 1))


class TestPicard:
    def test_linear_power_matches_shifted_linear_plant(self, rng):
        # p = 0 and beta = 0 turn kappa |u|^p u into kappa u
        grid = Grid(n_x=51)
        timegrid = TimeGrid(n_t=51, t_max=0.1)
        nonlinear = PhysParams(nu=1.0, alpha=0.5, gamma=5.0, kappa=1.0, p=0.0)
        linear = PhysParams(nu=1.0, alpha=0.5, gamma=4.0)
        u0 = first_mode(grid) + 0.3j * np.sin(3 * np.pi * grid.nodes / 2)

        a = run(nonlinear, grid, timegrid, None, u0, PicardConfig(tol=1e-12))
        b = run(linear, grid, timegrid, None, u0)
        np.testing.assert_allclose(a.final_state, b.final_state, atol=1e-10)
        assert a.picard_iters[1:].max() == 2

    def test_sweep_count(self, exp2_params, grid, caplog):
        law = build_control_law(exp2_params, grid)
        timegrid = TimeGrid(n_t=101, t_max=0.05)
        with caplog.at_level(logging.WARNING):
            record = run(exp2_params, grid, timegrid, law, exp2_profile(grid.nodes))
        assert "projecting" in caplog.text
        assert record.final_state[0] == 0
        assert record.picard_iters[1:].min() >= 1
        assert np.median(record.picard_iters[1:]) <= 10

    def test_step_function(self, exp2_params, grid):
        mats = SystemMatrices.assemble(exp2_params, grid, 5e-4)
        u = first_mode(grid)
        new, sweeps = step_nonlinear(u, mats, None, exp2_params)
        assert 1 <= sweeps <= 50
        assert new[0] == 0
        assert abs(neumann_stencil(new, grid.dx)) < 1e-8

    def test_non_convergence(self, exp2_params, grid):
        timegrid = TimeGrid(n_t=11, t_max=0.005)
        stepper = PicardCrankNicolson(exp2_params, grid, timegrid, None, PicardConfig(tol=1e-14, max_iters=1))
        with pytest.raises(NonConvergenceError) as excinfo:
            stepper.run(3 * first_mode(grid))
        assert excinfo.value.step == 0
        assert excinfo.value.residual > 1e-14

    def test_needs_nonlinear_plant(self, exp1_params, grid, short_time):
        with pytest.raises(DomainError):
            PicardCrankNicolson(exp1_params, grid, short_time)


class TestTargetSystem:
    def test_damped_mode(self, grid, short_time):
        params = PhysParams(nu=1.0, mu=5.0, n_modes=1)
        record = run_target(params, grid, short_time, first_mode(grid))
        ratio = record.l2_history[-1] / record.l2_history[0]
        assert ratio == pytest.approx(np.exp(-(np.pi**2 / 4 + 5.0) * 0.1), rel=2e-3)

    def test_closed_loop_follows_target(self, exp1_params, grid):
        timegrid = TimeGrid(n_t=101, t_max=0.05)
        basis = eigen_basis(grid, 2)
        kmat = build_k_matrix(build_kernel_table(exp1_params, grid), grid)
        proj = build_projection(basis, grid)
        w0 = basis.e_matrix[:, 0] + 0.5 * basis.e_matrix[:, 1] + 0j

        target = run_target(exp1_params, grid, timegrid, w0)
        law = build_control_law(exp1_params, grid)
        plant = run(exp1_params, grid, timegrid, law, forward_transform(kmat, proj, w0))

        expected = forward_transform(kmat, proj, target.final_state)
        err = np.linalg.norm(plant.final_state - expected) / np.linalg.norm(expected)
        assert err < 5e-2


class TestDecayFit:
    def make_record(self, times, values):
        n = len(times)
        return RunRecord(
            times=np.asarray(times),
            l2_history=np.asarray(values),
            h1_history=2 * np.asarray(values),
            feedback_history=np.zeros(n, dtype=complex),
            picard_iters=np.zeros(n, dtype=int),
            final_state=np.zeros(3, dtype=complex),
        )

    def test_exact_exponential(self):
        t = np.linspace(0, 2, 201)
        record = self.make_record(t, 3 * np.exp(-1.7 * t))
        assert fit_decay_rate(record, (0.5, 1.5)) == pytest.approx(1.7, abs=1e-10)
        assert fit_decay_rate(record, (0.5, 1.5), norm="l2") == pytest.approx(1.7, abs=1e-10)

    def test_growth_is_negative(self):
        t = np.linspace(0, 1, 11)
        assert fit_decay_rate(self.make_record(t, np.exp(2 * t)), (0, 1)) == pytest.approx(-2.0)

    def test_empty_window(self):
        t = np.linspace(0, 1, 11)
        with pytest.raises(WindowError):
            fit_decay_rate(self.make_record(t, np.exp(-t)), (2.0, 3.0))

    def test_zero_norm(self):
        t = np.linspace(0, 1, 11)
        with pytest.raises(WindowError):
            fit_decay_rate(self.make_record(t, np.zeros(11)), (0.0, 1.0))

    def test_unknown_norm(self):
        t = np.linspace(0, 1, 11)
        with pytest.raises(ValueError):
            fit_decay_rate(self.make_record(t, np.exp(-t)), (0, 1), norm="h2")


@pytest.mark.slow
class TestReferenceExperiments:
    def simulate(self, config_dir, name, **overrides):
        config = load_config(config_dir / f"{name}.yaml").with_overrides(**overrides)
        grid = Grid(n_x=config.n_x, L=config.params.L)
        timegrid = TimeGrid(n_t=config.n_t, t_max=config.t_max)
        law = build_control_law(config.params, grid) if config.control else None
        picard = PicardConfig(tol=config.picard.tol, max_iters=config.picard.max_iters)
        return config, run(config.params, grid, timegrid, law, sample_profile(config.initial, grid), picard)

    def test_experiment_one_closed_loop_decays(self, config_dir):
        config, record = self.simulate(config_dir, "exp1")
        eta = minimal_mode_plan(config.params).eta
        assert fit_decay_rate(record, (0.2, 0.8)) >= 0.9 * eta
        assert record.h1_history[-1] < 1e-4 * record.h1_history[0]

        # monotone once the transient is over, checked every 10 steps
        after = record.h1_history[record.times >= 0.2][::10]
        assert np.all(np.diff(after) < 0)

    def test_experiment_one_open_loop_grows(self, config_dir):
        _, record = self.simulate(config_dir, "exp1_uncontrolled")
        assert record.h1_history[-1] >= 10 * record.h1_history[0]
        assert fit_decay_rate(record, (0.2, 0.8)) < -15

    def test_experiment_two_closed_loop_decays(self, config_dir):
        config, record = self.simulate(config_dir, "exp2")
        assert record.h1_history[-1] < 1e-3 * record.h1_history[0]
        assert fit_decay_rate(record, config.fit_window) > 0
        assert 1 <= record.picard_iters[1:].min()
        assert record.picard_iters[1:].max() <= config.picard.max_iters

    def test_experiment_two_open_loop_plateau(self, config_dir):
        _, record = self.simulate(config_dir, "exp2_uncontrolled")
        tail = record.h1_history[-len(record.h1_history) // 10 :]
        assert (tail.max() - tail.min()) / tail.mean() < 1e-2
        assert tail[-1] > 0.1

    @pytest.mark.parametrize("n_t", [3001, 6001])
    def test_experiment_two_sweep_budget(self, config_dir, n_t):
        # dt = 1e-3 and 5e-4
        _, record = self.simulate(config_dir, "exp2", n_t=n_t)
        assert record.picard_iters[1:].max() <= 8


@pytest.mark.slow
class TestTimeConvergence:
    """Refinement in dt at n_x = 201 over [0, 0.1], reference at dt / 8 of the finest step."""

    LEVELS = (201, 401, 801)
    REFERENCE = 6401

    def orders(self, params, law, u0):
        grid = Grid(n_x=201)
        final = {
            n_t: run(params, grid, TimeGrid(n_t=n_t, t_max=0.1), law, u0).final_state
            for n_t in (*self.LEVELS, self.REFERENCE)
        }
        errors = np.array([np.max(np.abs(final[n_t] - final[self.REFERENCE])) for n_t in self.LEVELS])
        return np.log2(errors[:-1] / errors[1:])

    def test_open_loop_compatible_data(self, exp1_params):
        grid = Grid(n_x=201)
        assert np.all(self.orders(exp1_params, None, first_mode(grid)) >= 1.8)

    def test_closed_loop_lagged_feedback(self, exp1_params):
        # g^n = feedback(u^n) is explicit and u0 violates u_x(L) = g^0
        grid = Grid(n_x=201)
        law = build_control_law(exp1_params, grid)
        orders = self.orders(exp1_params, law, exp1_profile(grid.nodes))
        assert np.all(orders >= 1.0)
