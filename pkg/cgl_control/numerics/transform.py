"""
Projection-augmented Volterra transform and its inverse.

Responsibilities:
- Dirichlet-Neumann eigenbasis sampled on the grid
- Trapezoid discretization of the Volterra operator K
- Projection P_N onto the first N modes
- Forward transform T_N = I + K P_N and the recursion for I - T_N^-1
- Admissibility diagnostics for a (mu, N) pair
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from cgl_control.errors import DimensionError, InadmissiblePairError, ResolutionError
from cgl_control.models.params import Grid, PhysParams
from cgl_control.models.reports import AdmissibilityReport, DenominatorEntry, Verdict
from cgl_control.numerics.kernel import KernelTable, build_kernel_table

logger = logging.getLogger(__name__)

ADMISSIBILITY_THRESHOLD = 1e-10
POINTS_PER_WAVELENGTH = 8


# =============================================================================
# TYPES
# =============================================================================

class OperatorKind(str, Enum):
    K = "K"
    PN = "PN"
    UPSILON = "Upsilon"
    GAMMA = "Gamma"
    TN = "TN"
    TNINV = "TNinv"


class ProjectionWeights(str, Enum):
    """Quadrature used in the discrete projection and the inner products."""
    TRAPEZOID = "trapezoid"
    RECTANGLE = "rectangle"     # dx * W W^T


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    kind: OperatorKind

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return self.entries @ other.entries
        return self.entries @ other

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenBasis:
    """Columns of ``e_matrix`` are e_j(x_i) = sqrt(2/L) sin((2j-1) pi x_i / (2L))."""

    n_modes: int
    e_matrix: np.ndarray
    lambdas: np.ndarray


def quadrature_weights(grid: Grid, weights: ProjectionWeights = ProjectionWeights.TRAPEZOID) -> np.ndarray:
    if weights == ProjectionWeights.RECTANGLE:
        return np.full(grid.n_x, grid.dx)
    return np.asarray(grid.weights)


def eigen_basis(grid: Grid, n_modes: int) -> EigenBasis:
    """Raises ResolutionError when e_N gets fewer than 8 points per wavelength."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if grid.n_x - 1 < (2 * n_modes - 1) * POINTS_PER_WAVELENGTH / 4:
        raise ResolutionError(
            f"n_x={grid.n_x} cannot resolve {n_modes} modes "
            f"(need n_x >= {math.ceil((2 * n_modes - 1) * 2) + 1})"
        )
    j = np.arange(1, n_modes + 1)
    x = grid.nodes[:, None]
    w = np.sqrt(2 / grid.L) * np.sin((2 * j - 1) * np.pi * x / (2 * grid.L))
    lambdas = ((2 * j - 1) / 2) ** 2 * np.pi**2 / grid.L**2
    return EigenBasis(n_modes=n_modes, e_matrix=w, lambdas=lambdas)


# =============================================================================
# OPERATORS
# =============================================================================

def build_k_matrix(table: KernelTable, grid: Grid) -> OperatorMatrix:
    """(K)_{ij} = dx k_ij below the diagonal, dx/2 k_ii on it, 0 above."""
    if table.values.shape != (grid.n_x, grid.n_x):
        raise DimensionError(f"kernel table {table.values.shape} does not match n_x={grid.n_x}")
    k = grid.dx * np.tril(table.values, -1)
    k[np.diag_indices(grid.n_x)] = grid.dx / 2 * np.diag(table.values)
    # trapz over [0, x_0] is empty
    k[0, :] = 0
    return OperatorMatrix(entries=k, kind=OperatorKind.K)


def build_projection(
    basis: EigenBasis,
    grid: Grid,
    weights: ProjectionWeights = ProjectionWeights.TRAPEZOID,
) -> OperatorMatrix:
    """P = W Q W^T, so (P f)_i = sum_j e_j(x_i) <f, e_j>."""
    q = quadrature_weights(grid, weights)
    w = basis.e_matrix
    return OperatorMatrix(entries=w @ (w.T * q[None, :]), kind=OperatorKind.PN)


def forward_transform(kmat: OperatorMatrix, proj: OperatorMatrix, w: np.ndarray) -> np.ndarray:
    """u = w + K P w"""
    w = np.asarray(w)
    if w.shape[0] != kmat.n or proj.n != kmat.n:
        raise DimensionError(f"field of length {w.shape[0]} does not match operators of size {kmat.n}")
    return w + kmat.entries @ (proj.entries @ w)


def transform_matrix(kmat: OperatorMatrix, proj: OperatorMatrix) -> OperatorMatrix:
    return OperatorMatrix(entries=np.eye(kmat.n) + kmat.entries @ proj.entries, kind=OperatorKind.TN)


# =============================================================================
# INVERSE RECURSION
# =============================================================================

class _UpsilonRecursion:
    """
    Y_0 = 0,
    Y_j f = (I - Y_{j-1}) K P_j f - <(I - Y_{j-1}) K P_j f, e_j> / d_j * (I - Y_{j-1}) K e_j,
    d_j = 1 + <(I - Y_{j-1}) K e_j, e_j>.

    Level j is applied to a block of columns; it calls level j-1 once on the
    block extended by K e_j, so each d_j is computed exactly once per call.
    """

    def __init__(self, kmat: OperatorMatrix, basis: EigenBasis, q: np.ndarray,
                 threshold: float | None = None):
        self.w = basis.e_matrix
        self.kw = kmat.entries @ self.w
        self.q = q
        self.threshold = ADMISSIBILITY_THRESHOLD if threshold is None else threshold
        self.denominators: dict[int, complex] = {}

    def apply(self, j: int, block: np.ndarray) -> np.ndarray:
        if j == 0:
            return np.zeros_like(block, dtype=complex)
        wj = self.w[:, :j]
        x = self.kw[:, :j] @ (wj.T @ (self.q[:, None] * block))
        z = np.hstack([x, self.kw[:, j - 1 : j]])
        z = z - self.apply(j - 1, z)

        omega = self.q * self.w[:, j - 1]
        d_j = 1 + complex(omega @ z[:, -1])
        self.denominators[j] = d_j
        if abs(d_j) < self.threshold:
            raise InadmissiblePairError(j, d_j)
        return z[:, :-1] - np.outer(z[:, -1], omega @ z[:, :-1]) / d_j


def apply_upsilon(
    kmat: OperatorMatrix,
    basis: EigenBasis,
    grid: Grid,
    phi: np.ndarray,
    weights: ProjectionWeights = ProjectionWeights.TRAPEZOID,
) -> tuple[np.ndarray, np.ndarray]:
    """Upsilon_N applied to one field or to the columns of a block."""
    phi = np.asarray(phi, dtype=complex)
    if phi.shape[0] != grid.n_x:
        raise DimensionError(f"field of length {phi.shape[0]} does not match n_x={grid.n_x}")
    block = phi[:, None] if phi.ndim == 1 else phi
    recursion = _UpsilonRecursion(kmat, basis, quadrature_weights(grid, weights))
    out = recursion.apply(basis.n_modes, block)
    d = np.array([recursion.denominators[j] for j in range(1, basis.n_modes + 1)])
    return (out[:, 0] if phi.ndim == 1 else out), d


def build_upsilon(
    kmat: OperatorMatrix,
    basis: EigenBasis,
    grid: Grid,
    weights: ProjectionWeights = ProjectionWeights.TRAPEZOID,
) -> tuple[OperatorMatrix, np.ndarray]:
    """Dense Upsilon_N (so that T_N^-1 = I - Upsilon_N) and d_1 .. d_N."""
    entries, d = apply_upsilon(kmat, basis, grid, np.eye(grid.n_x, dtype=complex), weights)
    return OperatorMatrix(entries=entries, kind=OperatorKind.UPSILON), d


def inverse_matrix(upsilon: OperatorMatrix) -> OperatorMatrix:
    return OperatorMatrix(entries=np.eye(upsilon.n) - upsilon.entries, kind=OperatorKind.TNINV)


def operator_norms(
    kmat: OperatorMatrix,
    proj: OperatorMatrix,
    upsilon: OperatorMatrix,
    grid: Grid,
) -> tuple[float, float]:
    """Measured L2-induced norms of T_N and I - Upsilon_N on the grid."""
    s = np.sqrt(grid.weights)

    def l2_norm(a: np.ndarray) -> float:
        return float(np.linalg.norm((s[:, None] * a) / s[None, :], 2))

    return l2_norm(transform_matrix(kmat, proj).entries), l2_norm(inverse_matrix(upsilon).entries)


# =============================================================================
# ADMISSIBILITY
# =============================================================================

def admissibility_report(
    params: PhysParams,
    grid: Grid,
    weights: ProjectionWeights = ProjectionWeights.TRAPEZOID,
    with_norms: bool = True,
) -> AdmissibilityReport:
    """Always returns a report; inadmissibility shows up in the verdicts."""
    n = params.n_modes
    basis = eigen_basis(grid, n)
    kmat = build_k_matrix(build_kernel_table(params, grid), grid)
    recursion = _UpsilonRecursion(kmat, basis, quadrature_weights(grid, weights))
    upsilon = None
    try:
        upsilon = recursion.apply(n, np.eye(grid.n_x, dtype=complex))
    except InadmissiblePairError as e:
        logger.warning(f"(mu={params.mu}, N={n}) inadmissible: {e}")

    entries = []
    for j in range(1, n + 1):
        d = recursion.denominators.get(j)
        if d is None:
            entries.append(DenominatorEntry(j=j, re=math.nan, im=math.nan, verdict=Verdict.UNDETERMINED))
            continue
        verdict = Verdict.ADMISSIBLE if abs(d) >= ADMISSIBILITY_THRESHOLD else Verdict.INADMISSIBLE
        entries.append(DenominatorEntry(j=j, re=d.real, im=d.imag, verdict=verdict))

    norms = (None, None)
    if upsilon is not None and with_norms:
        proj = build_projection(basis, grid, weights)
        norms = operator_norms(kmat, proj, OperatorMatrix(upsilon, OperatorKind.UPSILON), grid)

    report = AdmissibilityReport(
        mu=params.mu,
        n_modes=n,
        n_x=grid.n_x,
        projection=ProjectionWeights(weights).value,
        threshold=ADMISSIBILITY_THRESHOLD,
        entries=entries,
        norm_transform=norms[0],
        norm_inverse=norms[1],
    )
    logger.info(f"Admissibility (mu={params.mu}, N={n}): {'admissible' if report.admissible else 'inadmissible'}")
    return report


def admissibility_sweep(
    params: PhysParams,
    grid: Grid,
    mus: list[float] | None = None,
    modes: list[int] | None = None,
    weights: ProjectionWeights = ProjectionWeights.TRAPEZOID,
) -> list[AdmissibilityReport]:
    """Reports over a grid of mu values, of mode counts, or both (outer product)."""
    mus = list(mus) if mus is not None else [params.mu]
    modes = list(modes) if modes is not None else [params.n_modes]
    return [
        admissibility_report(params.with_control(mu=mu, n_modes=n), grid, weights, with_norms=False)
        for mu in mus
        for n in modes
    ]
