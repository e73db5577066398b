"""
Time steppers for the plant, the open-loop problem and the target system.
"""

from .base import BaseStepper, RunRecord
from .crank_nicolson import (
    LinearCrankNicolson,
    OpenLoopCrankNicolson,
    PicardConfig,
    PicardCrankNicolson,
    SolverConfig,
    SystemMatrices,
    TargetCrankNicolson,
    run,
    run_target,
    step_linear,
    step_nonlinear,
)
from .decay import fit_decay_rate

__all__ = [
    "BaseStepper",
    "RunRecord",
    "SystemMatrices",
    "SolverConfig",
    "PicardConfig",
    "LinearCrankNicolson",
    "PicardCrankNicolson",
    "OpenLoopCrankNicolson",
    "TargetCrankNicolson",
    "step_linear",
    "step_nonlinear",
    "run",
    "run_target",
    "fit_decay_rate",
]
