"""
Backstepping kernel k(x, y) on the triangle 0 <= y <= x <= L.

The kernel solves

    (nu + i alpha)(k_xx - k_yy) + mu k = 0,
    k(x, 0) = 0,   k(x, x) = -mu x / (2 (nu + i alpha)),

and is represented by the entire series

    k(x, y) = -mu y / (2 c) * sum_m q^m (x^2 - y^2)^m / (m! (m+1)!),
    c = nu + i alpha,   q = -mu / (4 c).

Terms are generated by multiplicative recurrence so large truncation orders
never touch a factorial.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from cgl_control.errors import DomainError, NonConvergenceError
from cgl_control.models.params import Grid, PhysParams

logger = logging.getLogger(__name__)

MAX_TRUNCATION = 200
TRUNCATION_RTOL = 1e-16


@dataclass(frozen=True)
class KernelTable:
    """
    Truncated kernel sampled on the grid triangle.

    ``values[i, j]`` holds k(x_i, y_j) for j <= i and zero above the
    diagonal. ``deriv_trace[j]`` holds k_x(L, y_j).
    """

    m_trunc: int
    values: np.ndarray
    deriv_trace: np.ndarray
    mu: float
    nu: float
    alpha: float

    def to_dataframe(self, grid: Grid) -> pd.DataFrame:
        """Long-format dump of the lower triangle."""
        i, j = np.tril_indices(grid.n_x)
        k = self.values[i, j]
        return pd.DataFrame({
            "i": i,
            "j": j,
            "x_i": grid.nodes[i],
            "y_j": grid.nodes[j],
            "re_k": k.real,
            "im_k": k.imag,
        })


# =============================================================================
# SERIES
# =============================================================================

def _series_terms(z: np.ndarray, q: complex, m_trunc: int):
    """Yield the scaled terms q^m z^m / (m! (m+1)!) for m = 0 .. m_trunc."""
    term = np.ones_like(z, dtype=complex)
    yield term
    for m in range(m_trunc):
        term = term * (q * z) / ((m + 1) * (m + 2))
        yield term


def kernel_series(x, y, params: PhysParams, m_trunc: int) -> np.ndarray:
    """
    Truncated series at arbitrary (x, y), without the triangle check.

    Broadcasts over array arguments.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = params.diffusivity
    q = -params.mu / (4 * c)
    z = x**2 - y**2
    total = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    for term in _series_terms(z, q, m_trunc):
        total = total + term
    return -params.mu * y / (2 * c) * total


def kernel_value(x: float, y: float, params: PhysParams, m_trunc: int) -> complex:
    tol = 1e-12 * params.L
    if not (-tol <= y <= x + tol and x <= params.L + tol):
        raise DomainError(f"({x}, {y}) lies outside the triangle 0 <= y <= x <= {params.L}")
    return complex(kernel_series(x, y, params, m_trunc))


# =============================================================================
# TRUNCATION
# =============================================================================

def choose_truncation(params: PhysParams, grid: Grid) -> int:
    """
    Smallest M whose next term is below a relative machine tolerance over the
    whole grid triangle.
    """
    if params.mu == 0:
        return 0

    x = grid.nodes[:, None]
    y = grid.nodes[None, :]
    mask = y <= x
    c = params.diffusivity
    prefactor = np.abs(-params.mu * y / (2 * c))
    z = np.where(mask, x**2 - y**2, 0.0)
    q = -params.mu / (4 * c)

    partial = np.zeros(z.shape, dtype=complex)
    term = np.ones(z.shape, dtype=complex)
    partial += term
    for m in range(MAX_TRUNCATION):
        term = term * (q * z) / ((m + 1) * (m + 2))
        increment = np.max(prefactor * np.abs(term))
        scale = 1.0 + np.max(prefactor * np.abs(partial))
        if increment < TRUNCATION_RTOL * scale:
            logger.info(f"Kernel truncation order M={m} (mu={params.mu}, n_x={grid.n_x})")
            return m
        partial += term

    raise NonConvergenceError(
        f"kernel series did not converge within M={MAX_TRUNCATION}; "
        f"mu L^2 / (4|nu + i alpha|) = {params.mu * params.L**2 / (4 * abs(c)):.1f} is too large",
        residual=float(increment),
    )


# =============================================================================
# TRACE AND TABLE
# =============================================================================

def kernel_deriv_trace(params: PhysParams, grid: Grid, m_trunc: int) -> np.ndarray:
    """
    k_x(L, y_j) by term-wise differentiation of the series.

    d/dx (x^2 - y^2)^m = 2 m x (x^2 - y^2)^(m-1), so with
    a_m = (q z)^(m-1) / ((m-1)! (m+1)!) the trace is
    prefactor(y) * 2 L q * sum_{m>=1} a_m, a_1 = 1/2.
    """
    y = grid.nodes
    c = params.diffusivity
    q = -params.mu / (4 * c)
    z = params.L**2 - y**2
    total = np.zeros(grid.n_x, dtype=complex)
    a = np.full(grid.n_x, 0.5, dtype=complex)
    for m in range(1, m_trunc + 1):
        total += a
        a = a * (q * z) / (m * (m + 2))
    return -params.mu * y / (2 * c) * 2 * params.L * q * total


def build_kernel_table(params: PhysParams, grid: Grid, m_trunc: int | None = None) -> KernelTable:
    if m_trunc is None:
        m_trunc = choose_truncation(params, grid)
    x = grid.nodes[:, None]
    y = grid.nodes[None, :]
    values = np.tril(kernel_series(x, y, params, m_trunc))
    return KernelTable(
        m_trunc=m_trunc,
        values=values,
        deriv_trace=kernel_deriv_trace(params, grid, m_trunc),
        mu=params.mu,
        nu=params.nu,
        alpha=params.alpha,
    )


def kernel_residual(table: KernelTable, grid: Grid, params: PhysParams) -> float:
    """
    max |(nu + i alpha)(D_xx k - D_yy k) + mu k| over triangle nodes at least
    two nodes away from y = 0 and from the diagonal.
    """
    if grid.n_x < 5:
        raise DomainError("kernel_residual needs n_x >= 5")
    k = table.values
    h2 = grid.dx**2
    i, j = np.nonzero(np.tri(grid.n_x, dtype=bool))
    keep = (j >= 2) & (i - j >= 2) & (i <= grid.n_x - 2)
    i, j = i[keep], j[keep]
    if i.size == 0:
        return 0.0
    k_xx = (k[i + 1, j] - 2 * k[i, j] + k[i - 1, j]) / h2
    k_yy = (k[i, j + 1] - 2 * k[i, j] + k[i, j - 1]) / h2
    residual = params.diffusivity * (k_xx - k_yy) + params.mu * k[i, j]
    return float(np.max(np.abs(residual)))
