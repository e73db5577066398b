#!/usr/bin/env python3
"""
Run both reference experiments with and without control and print a summary.
"""

import logging

from cgl_control.control.controller import build_control_law, minimal_mode_plan, rapid_plan
from cgl_control.models.experiment import load_config
from cgl_control.models.params import Grid, TimeGrid
from cgl_control.numerics.transform import admissibility_report
from cgl_control.processing.initial_data import sample_profile
from cgl_control.solvers.crank_nicolson import PicardConfig, run
from cgl_control.solvers.decay import fit_decay_rate


def simulate(path: str):
    config = load_config(path)
    params = config.params
    grid = Grid(n_x=config.n_x, L=params.L)
    timegrid = TimeGrid(n_t=config.n_t, t_max=config.t_max)
    law = build_control_law(params, grid) if config.control else None
    picard = PicardConfig(tol=config.picard.tol, max_iters=config.picard.max_iters)
    return config, run(params, grid, timegrid, law, sample_profile(config.initial, grid), picard)


def main():
    logging.basicConfig(level=logging.WARNING)

    print("=" * 80)
    print("EXPERIMENT 1 - linear plant")
    print("=" * 80)

    config, record = simulate("configs/exp1.yaml")
    plan = minimal_mode_plan(config.params)
    report = admissibility_report(config.params, Grid(n_x=config.n_x, L=config.params.L))
    print(plan.to_text())
    print()
    print(report.to_text())
    print(f"\nfitted H1 rate on [0.2, 0.8]: {fit_decay_rate(record, (0.2, 0.8)):.4f}")
    print(f"predicted eta:                {plan.eta:.4f}")

    _, open_loop = simulate("configs/exp1_uncontrolled.yaml")
    print(f"uncontrolled H1 growth:       {open_loop.h1_history[-1] / open_loop.h1_history[0]:.3e}")

    print("\n" + "=" * 80)
    print("EXPERIMENT 2 - nonlinear plant")
    print("=" * 80)

    config, record = simulate("configs/exp2.yaml")
    print(rapid_plan(config.params).to_text())
    stats = record.stats()
    print(f"\ncontrolled H1:   {stats['h1_initial']:.4f} -> {stats['h1_final']:.3e}")
    print(f"max Picard sweeps: {stats['max_picard_iters']}")

    _, free = simulate("configs/exp2_uncontrolled.yaml")
    print(f"uncontrolled H1: {free.h1_history[0]:.4f} -> {free.h1_history[-1]:.4f} (plateau)")


if __name__ == "__main__":
    main()
