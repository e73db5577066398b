"""
Command-line runner.

    cgl-control run          --config configs/exp1.yaml
    cgl-control admissibility --config configs/exp1.yaml --mu-sweep 10:200:20
    cgl-control rateplan     --config configs/exp1.yaml
    cgl-control crosscheck   --config configs/crosscheck_heat.yaml
    cgl-control selftest

Outputs go to <out>/<experiment name>/. Failures print a single line
``error[<code>]: <message>`` on stderr and exit with the error's status.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd
from dotenv import load_dotenv

from cgl_control.control.controller import (
    build_control_law,
    feedback,
    instability_level,
    minimal_mode_plan,
    rapid_plan,
)
from cgl_control.errors import (
    CGLControlError,
    ConfigError,
    CrosscheckFailure,
    InadmissiblePairError,
    WindowError,
)
from cgl_control.models.experiment import CrosscheckSettings, ExperimentConfig, load_config
from cgl_control.models.params import Grid, PhysParams, TimeGrid
from cgl_control.models.reports import RateMode, RatePlan, Verdict
from cgl_control.numerics.discretization import norm_h1, norm_l2
from cgl_control.numerics.kernel import build_kernel_table
from cgl_control.numerics.transform import (
    ProjectionWeights,
    admissibility_report,
    admissibility_sweep,
    apply_upsilon,
    build_k_matrix,
    build_projection,
    eigen_basis,
    forward_transform,
)
from cgl_control.oracle.crosscheck import cross_validate
from cgl_control.oracle.utm import BoundaryData, ContourSpec
from cgl_control.processing.export import write_csv, write_final_state, write_kernel_csv, write_norms, write_text
from cgl_control.processing.initial_data import resolve_profile, sample_profile
from cgl_control.solvers.crank_nicolson import PicardConfig, run as run_solver
from cgl_control.solvers.decay import fit_decay_rate

logger = logging.getLogger(__name__)

DEFAULT_OUT_DIR = "out"
SELFTEST_PARAMS = PhysParams(nu=1.0, alpha=3.0, gamma=23.0, mu=60.0, n_modes=2)


# =============================================================================
# HELPERS
# =============================================================================

def _load(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    config = load_config(args.config)
    return config.with_overrides(n_x=args.nx, n_t=args.nt, t_max=args.tmax, seed=args.seed, out_dir=args.out)


def _out_dir(config: ExperimentConfig) -> Path:
    root = config.out_dir or os.getenv("CGL_CONTROL_OUT_DIR") or DEFAULT_OUT_DIR
    return Path(root) / config.name


def _grids(config: ExperimentConfig) -> tuple[Grid, TimeGrid]:
    return Grid(n_x=config.n_x, L=config.params.L), TimeGrid(n_t=config.n_t, t_max=config.t_max)


def _rate_plan(config: ExperimentConfig) -> RatePlan | None:
    if config.rate_mode == RateMode.RAPID:
        return rapid_plan(config.params)
    if config.rate_mode == RateMode.MINIMAL:
        return minimal_mode_plan(config.params)
    return None


def _parse_mu_sweep(text: str) -> list[float]:
    try:
        start, stop, count = text.split(":")
        return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
    except ValueError:
        raise ConfigError(f"--mu-sweep expects start:stop:count, got '{text}'")


def _parse_n_sweep(text: str) -> list[int]:
    try:
        first, last = (int(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"--n-sweep expects first:last, got '{text}'")
    if not 1 <= first <= last:
        raise ConfigError(f"--n-sweep needs 1 <= first <= last, got '{text}'")
    return list(range(first, last + 1))


# =============================================================================
# SUBCOMMANDS
# =============================================================================

def cmd_run(args) -> int:
    config = _load(args)
    params = config.params
    grid, timegrid = _grids(config)
    out = _out_dir(config)
    projection = ProjectionWeights(config.projection)

    lines = [
        f"experiment {config.name}  config_sha256={config.config_hash}",
        f"plant={config.plant.value} control={'on' if config.control else 'off'} "
        f"n_x={grid.n_x} n_t={timegrid.n_t} t_max={timegrid.t_max:g}",
        f"instability level M = {instability_level(params)}",
    ]

    law = None
    plan = None
    if config.control:
        plan = _rate_plan(config)
        if plan is not None:
            write_text(plan.to_text(), out / "rateplan.txt")
            lines.append(plan.to_text())
            if plan.n_modes != params.n_modes:
                logger.warning(f"rate plan suggests N={plan.n_modes}, running with configured N={params.n_modes}")

        report = admissibility_report(params, grid, projection)
        write_text(report.to_text(), out / "admissibility.txt")
        write_csv(report.to_dataframe(), out / "admissibility.csv", config.config_hash)
        lines.append(report.to_text())
        if not report.admissible:
            print(report.to_text())
            failing = next(e for e in report.entries if e.verdict != Verdict.ADMISSIBLE)
            raise InadmissiblePairError(failing.j, failing.value)
        law = build_control_law(params, grid, projection)

    if config.dump_kernel:
        write_kernel_csv(build_kernel_table(params, grid), grid, out / "kernel.csv", config.config_hash)

    u0 = sample_profile(config.initial, grid)
    picard = PicardConfig(tol=config.picard.tol, max_iters=config.picard.max_iters)
    record = run_solver(params, grid, timegrid, law, u0, picard, label=config.name)
    write_norms(record, out / "norms.csv", config.config_hash)
    write_final_state(record, grid, out / "final_state.csv", config.config_hash)

    window = config.fit_window or (0.2 * config.t_max, 0.8 * config.t_max)
    stats = record.stats()
    lines.append(f"H1 norm {stats['h1_initial']:.6g} -> {stats['h1_final']:.6g} (ratio {stats['h1_ratio']:.3e})")
    for norm in ("h1", "l2"):
        try:
            rate = fit_decay_rate(record, window, norm=norm)
            lines.append(f"fitted {norm} decay rate on [{window[0]:g}, {window[1]:g}] = {rate:.6g}")
        except WindowError as e:
            lines.append(f"fitted {norm} decay rate: n/a ({e})")
    if plan is not None:
        lines.append(f"predicted eta = {plan.eta:.6g}")
    if not params.is_linear:
        lines.append(f"max Picard sweeps = {stats['max_picard_iters']}")

    summary = "\n".join(lines)
    write_text(summary, out / "summary.txt")
    print(summary)
    return 0


def cmd_admissibility(args) -> int:
    config = _load(args)
    grid, _ = _grids(config)
    projection = ProjectionWeights(config.projection)
    out = _out_dir(config)

    if args.mu_sweep or args.n_sweep:
        mus = _parse_mu_sweep(args.mu_sweep) if args.mu_sweep else None
        modes = _parse_n_sweep(args.n_sweep) if args.n_sweep else None
        reports = admissibility_sweep(config.params, grid, mus, modes, projection)
        df = pd.DataFrame([
            {"mu": r.mu, "n_modes": r.n_modes, "min_abs_d": r.min_modulus,
             "verdict": "admissible" if r.admissible else "inadmissible"}
            for r in reports
        ])
        write_csv(df, out / "admissibility_sweep.csv", config.config_hash)
        print(df.to_string(index=False))
        return 0

    report = admissibility_report(config.params, grid, projection)
    write_text(report.to_text(), out / "admissibility.txt")
    write_csv(report.to_dataframe(), out / "admissibility.csv", config.config_hash)
    print(report.to_text())
    if not report.admissible:
        failing = next(e for e in report.entries if e.verdict != Verdict.ADMISSIBLE)
        raise InadmissiblePairError(failing.j, failing.value)
    return 0


def cmd_rateplan(args) -> int:
    config = _load(args)
    plan = _rate_plan(config) or minimal_mode_plan(config.params)
    write_text(plan.to_text(), _out_dir(config) / "rateplan.txt")
    print(plan.to_text())
    return 0


def cmd_crosscheck(args) -> int:
    config = _load(args)
    if not config.params.is_linear:
        raise ConfigError("crosscheck needs a linear plant (kappa = 0)")
    settings = config.crosscheck or CrosscheckSettings()
    grid, timegrid = _grids(config)
    contour = ContourSpec.for_params(
        config.params,
        r_max=settings.r_max,
        n_quad=settings.n_quad,
        fourier_nodes=settings.fourier_nodes,
        time_nodes=settings.time_nodes,
    )
    bdry = BoundaryData.from_coefficients(settings.a_coefficients, settings.b_coefficients)
    u0 = resolve_profile(config.initial, config.params.L)

    report = cross_validate(config.params, grid, timegrid, u0, bdry, contour, settings.tolerance)
    write_csv(report.to_dataframe(), _out_dir(config) / "crosscheck.csv", config.config_hash)
    print(report.to_text())
    if not report.passed:
        raise CrosscheckFailure(report.discrepancy, report.tolerance)
    return 0


# =============================================================================
# SELFTEST
# =============================================================================

def _selftest_checks(params: PhysParams, n_x: int, seed: int) -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(seed)
    grid = Grid(n_x=n_x, L=params.L)
    results = []

    table = build_kernel_table(params, grid)
    x = grid.nodes
    c = params.diffusivity
    diag_exact = -params.mu * x / (2 * c)
    scale = max(1.0, float(np.max(np.abs(diag_exact))))
    err = max(float(np.max(np.abs(table.values[:, 0]))),
              float(np.max(np.abs(np.diag(table.values) - diag_exact))))
    results.append(("kernel boundary conditions", err <= 1e-12 * scale, f"max error {err:.2e}"))

    basis = eigen_basis(grid, params.n_modes)
    kmat = build_k_matrix(table, grid)
    proj = build_projection(basis, grid)
    w = rng.standard_normal((grid.n_x, 20)) + 1j * rng.standard_normal((grid.n_x, 20))
    u = forward_transform(kmat, proj, w)
    back = u - apply_upsilon(kmat, basis, grid, u)[0]
    err = float(np.max(np.abs(back - w)) / np.max(np.abs(w)))
    results.append(("transform round trip", err < 1e-8, f"relative error {err:.2e}"))

    law = build_control_law(params, grid)
    u1, u2 = (rng.standard_normal(grid.n_x) + 1j * rng.standard_normal(grid.n_x) for _ in range(2))
    a, b = complex(rng.standard_normal(), rng.standard_normal()), complex(rng.standard_normal(), 0.5)
    lhs = feedback(law, a * u1 + b * u2, grid)
    rhs = a * feedback(law, u1, grid) + b * feedback(law, u2, grid)
    err = abs(lhs - rhs) / max(1.0, abs(rhs))
    results.append(("feedback linearity", err < 1e-12, f"relative error {err:.2e}"))

    worst = 0.0
    lam1 = params.eigenvalue(1)
    modes = eigen_basis(grid, 10).e_matrix
    for _ in range(50):
        coeffs = (rng.standard_normal(10) + 1j * rng.standard_normal(10)) / np.arange(1, 11)
        f = modes @ coeffs
        worst = max(worst, lam1 * norm_l2(f, grid) ** 2 / (norm_h1(f, grid) ** 2 - norm_l2(f, grid) ** 2))
    results.append(("Poincare inequality", worst <= 1 + 1e-3, f"max ratio {worst:.6f}"))
    return results


def cmd_selftest(args) -> int:
    if args.config:
        config = _load(args)
        params, n_x, seed = config.params, config.n_x, config.seed
    else:
        params, n_x, seed = SELFTEST_PARAMS, args.nx or 101, args.seed or 0
    results = _selftest_checks(params, n_x, seed)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


# =============================================================================
# ENTRY POINT
# =============================================================================

class _Parser(argparse.ArgumentParser):
    """Usage errors become ConfigError so they share the single-line report."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _report(code: str, message: object) -> None:
    print(f"error[{code}]: " + " ".join(str(message).split()), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cgl-control", description="Boundary feedback stabilization of the CGL equation")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Experiment YAML file")
    common.add_argument("--out", type=str, help="Output root directory")
    common.add_argument("--seed", type=int, help="Random seed")
    common.add_argument("--nx", type=int, help="Override n_x")
    common.add_argument("--nt", type=int, help="Override n_t")
    common.add_argument("--tmax", type=float, help="Override t_max")
    common.add_argument("--log-level", type=str, default=None, help="DEBUG, INFO, WARNING or ERROR")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="Simulate an experiment").set_defaults(handler=cmd_run)
    adm = sub.add_parser("admissibility", parents=[common], help="Denominators d_j for (mu, N)")
    adm.add_argument("--mu-sweep", type=str, help="start:stop:count")
    adm.add_argument("--n-sweep", type=str, help="first:last")
    adm.set_defaults(handler=cmd_admissibility)
    sub.add_parser("rateplan", parents=[common], help="Decay-rate plan").set_defaults(handler=cmd_rateplan)
    sub.add_parser("crosscheck", parents=[common], help="Finite differences vs transform method").set_defaults(handler=cmd_crosscheck)
    sub.add_parser("selftest", parents=[common], help="Quick invariant checks").set_defaults(handler=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as e:
        _report(e.code, e)
        return e.exit_status
    except SystemExit as e:
        return ConfigError.exit_status if e.code else 0

    level = (args.log_level or os.getenv("CGL_CONTROL_LOG_LEVEL") or "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")

    try:
        return args.handler(args)
    except CGLControlError as e:
        _report(e.code, e)
        return e.exit_status
    except OSError as e:
        _report("io", e)
        return 1
    except Exception as e:
        logger.debug("unhandled failure", exc_info=True)
        _report("internal", f"{type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
