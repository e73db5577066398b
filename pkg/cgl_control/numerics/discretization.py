"""
Quadrature and discrete norms on a uniform grid.

Fields are plain complex numpy vectors in natural node order (index 0 is
x = 0). Every operation here is a pure function of its inputs.
"""

import numpy as np

from cgl_control.errors import DimensionError, DomainError
from cgl_control.models.params import Grid

ComplexField = np.ndarray


def _check(f: np.ndarray, grid: Grid) -> np.ndarray:
    f = np.asarray(f)
    if f.ndim != 1 or f.shape[0] != grid.n_x:
        raise DimensionError(f"field of shape {f.shape} does not match grid with n_x={grid.n_x}")
    return f


def trapz(f: ComplexField, grid: Grid) -> complex:
    """dx * (f_0/2 + f_1 + ... + f_{n-2} + f_{n-1}/2)"""
    f = _check(f, grid)
    return complex(grid.weights @ f)


def inner(f: ComplexField, g: ComplexField, grid: Grid) -> complex:
    """Trapezoid L2 inner product, conjugate-linear in the second slot."""
    f = _check(f, grid)
    g = _check(g, grid)
    return complex(grid.weights @ (f * np.conj(g)))


def derivative(f: ComplexField, grid: Grid) -> ComplexField:
    """
    Second-order first derivative: centered in the interior, one-sided
    (3f_0 - 4f_1 + f_2 style) at both ends.
    """
    f = _check(f, grid)
    return np.gradient(f, grid.dx, edge_order=2)


def norm_l2(f: ComplexField, grid: Grid) -> float:
    f = _check(f, grid)
    return float(np.sqrt(grid.weights @ np.abs(f) ** 2))


def norm_h1(f: ComplexField, grid: Grid) -> float:
    if grid.n_x < 3:
        raise DomainError("norm_h1 needs at least 3 nodes")
    df = derivative(f, grid)
    return float(np.sqrt(norm_l2(f, grid) ** 2 + norm_l2(df, grid) ** 2))


def neumann_stencil(f: ComplexField, dx: float) -> complex:
    """One-sided second-order derivative at the right end."""
    return (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * dx)
