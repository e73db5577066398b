"""Open-loop Crank-Nicolson against the transform-method solution."""

import logging

import numpy as np

from cgl_control.errors import DomainError
from cgl_control.models.params import Grid, PhysParams, TimeGrid
from cgl_control.models.reports import CrossSample, CrossValidationReport
from cgl_control.oracle.utm import BoundaryData, ContourSpec, InitialDatum, prepare_formula
from cgl_control.solvers.crank_nicolson import OpenLoopCrankNicolson

logger = logging.getLogger(__name__)

DEFAULT_X_FRACTIONS = (0.1, 0.3, 0.5, 0.7, 0.9)
DEFAULT_T_FRACTIONS = (0.25, 0.5, 1.0)


def sample_lattice(
    grid: Grid,
    timegrid: TimeGrid,
    x_fractions: tuple[float, ...] = DEFAULT_X_FRACTIONS,
    t_fractions: tuple[float, ...] = DEFAULT_T_FRACTIONS,
) -> tuple[list[int], list[int]]:
    """Node and level indices nearest to the requested fractions of L and t_max."""
    nodes = sorted({min(grid.n_x - 2, max(1, round(f * (grid.n_x - 1)))) for f in x_fractions})
    levels = sorted({min(timegrid.n_t - 1, max(1, round(f * (timegrid.n_t - 1)))) for f in t_fractions})
    return nodes, levels


def cross_validate(
    params: PhysParams,
    grid: Grid,
    timegrid: TimeGrid,
    u0: InitialDatum,
    bdry: BoundaryData | None = None,
    contour: ContourSpec | None = None,
    tolerance: float = 1e-2,
    x_fractions: tuple[float, ...] = DEFAULT_X_FRACTIONS,
    t_fractions: tuple[float, ...] = DEFAULT_T_FRACTIONS,
) -> CrossValidationReport:
    """
    Run both engines on the same open-loop data and compare them on a coarse
    (x, t) lattice of grid nodes and time levels.
    """
    if not params.is_linear:
        raise DomainError("cross-validation needs the linear plant (kappa = 0)")
    bdry = bdry or BoundaryData()
    u0_grid = np.asarray(u0(grid.nodes), dtype=complex) if callable(u0) else np.asarray(u0, dtype=complex)

    nodes, levels = sample_lattice(grid, timegrid, x_fractions, t_fractions)
    stepper = OpenLoopCrankNicolson(params, grid, timegrid, bdry.a, bdry.b)
    record = stepper.run(u0_grid, label="open loop", snapshot_steps=set(levels))

    samples = []
    for n in levels:
        t = float(timegrid.times[n])
        formula = prepare_formula(u0, bdry, None, params, contour, t)
        for i in nodes:
            x = float(grid.nodes[i])
            samples.append(CrossSample(x=x, t=t, u_fd=complex(record.snapshots[n][i]), u_utm=formula.evaluate(x).value))

    report = CrossValidationReport(samples=samples, tolerance=tolerance)
    logger.info(report.to_text())
    return report
