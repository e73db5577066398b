"""
Transform-method solution of the open-loop linear problem, used to check the
finite-difference solver.
"""

from .crosscheck import cross_validate
from .utm import (
    BoundaryData,
    ContourSpec,
    PointEvaluation,
    evaluate_field,
    evaluate_point,
    evaluate_solution,
    finite_fourier,
    temporal_transform,
)

__all__ = [
    "ContourSpec",
    "BoundaryData",
    "PointEvaluation",
    "finite_fourier",
    "temporal_transform",
    "evaluate_solution",
    "evaluate_point",
    "evaluate_field",
    "cross_validate",
]
