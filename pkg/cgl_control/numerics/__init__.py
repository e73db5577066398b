"""
Discretization, backstepping kernel and the projection-augmented transform.
"""

from .discretization import derivative, inner, neumann_stencil, norm_h1, norm_l2, trapz
from .kernel import (
    KernelTable,
    build_kernel_table,
    choose_truncation,
    kernel_deriv_trace,
    kernel_residual,
    kernel_series,
    kernel_value,
)
from .transform import (
    EigenBasis,
    OperatorKind,
    OperatorMatrix,
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
    operator_norms,
)

__all__ = [
    "trapz",
    "inner",
    "derivative",
    "norm_l2",
    "norm_h1",
    "neumann_stencil",
    "KernelTable",
    "kernel_series",
    "kernel_value",
    "choose_truncation",
    "kernel_deriv_trace",
    "build_kernel_table",
    "kernel_residual",
    "OperatorKind",
    "OperatorMatrix",
    "ProjectionWeights",
    "EigenBasis",
    "eigen_basis",
    "build_k_matrix",
    "build_projection",
    "forward_transform",
    "apply_upsilon",
    "build_upsilon",
    "inverse_matrix",
    "operator_norms",
    "admissibility_report",
    "admissibility_sweep",
]
