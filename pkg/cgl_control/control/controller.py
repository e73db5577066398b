"""
Finite-dimensional Neumann feedback and decay-rate planning.

The control input is

    u_x(L) = int_0^L k_x(L, y) v(y) dy + zeta v(L),
    v = P_N (I - Upsilon_N) u,   zeta = -mu L / (2 (nu + i alpha)).
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from cgl_control.errors import DimensionError, DomainError, InvalidRateError
from cgl_control.models.params import Grid, PhysParams
from cgl_control.models.reports import RateMode, RatePlan
from cgl_control.numerics.kernel import build_kernel_table
from cgl_control.numerics.transform import (
    OperatorKind,
    OperatorMatrix,
    ProjectionWeights,
    build_k_matrix,
    build_projection,
    build_upsilon,
    eigen_basis,
)

logger = logging.getLogger(__name__)


# =============================================================================
# FEEDBACK LAW
# =============================================================================

@dataclass(frozen=True)
class ControlLaw:
    deriv_trace: np.ndarray
    gamma_matrix: OperatorMatrix
    zeta: complex
    n_modes: int
    weights: np.ndarray

    @cached_property
    def functional(self) -> np.ndarray:
        """Row vector r with feedback(u) = r @ u."""
        row = self.weights * self.deriv_trace
        row[-1] += self.zeta
        return row @ self.gamma_matrix.entries


def build_control_law(
    params: PhysParams,
    grid: Grid,
    projection: ProjectionWeights = ProjectionWeights.TRAPEZOID,
) -> ControlLaw:
    """Kernel, transform and inverse for (mu, N); raises InadmissiblePairError."""
    table = build_kernel_table(params, grid)
    basis = eigen_basis(grid, params.n_modes)
    kmat = build_k_matrix(table, grid)
    proj = build_projection(basis, grid, projection)
    upsilon, d = build_upsilon(kmat, basis, grid, projection)
    logger.info(f"Control law ready: mu={params.mu}, N={params.n_modes}, M_trunc={table.m_trunc}, "
                f"min|d_j|={np.min(np.abs(d)):.3g}")

    gamma = proj.entries - proj.entries @ upsilon.entries
    return ControlLaw(
        deriv_trace=table.deriv_trace,
        gamma_matrix=OperatorMatrix(entries=gamma, kind=OperatorKind.GAMMA),
        zeta=-params.mu * params.L / (2 * params.diffusivity),
        n_modes=params.n_modes,
        weights=np.asarray(grid.weights),
    )


def feedback(law: ControlLaw, u: np.ndarray, grid: Grid) -> complex:
    u = np.asarray(u)
    if u.shape != (grid.n_x,) or law.gamma_matrix.n != grid.n_x:
        raise DimensionError(f"state of shape {u.shape} does not match the law on n_x={law.gamma_matrix.n}")
    v = law.gamma_matrix.entries @ u
    return complex(grid.weights @ (law.deriv_trace * v) + law.zeta * v[-1])


def feedback_gain(law: ControlLaw, grid: Grid) -> float:
    """Smallest C with |feedback(u)| <= C ||u||_L2 on the grid."""
    r = law.functional
    return float(np.sqrt(np.sum(np.abs(r) ** 2 / grid.weights)))


# =============================================================================
# RATE PLANNING
# =============================================================================

def instability_level(params: PhysParams) -> int:
    """M with lambda_M <= gamma/nu < lambda_{M+1}."""
    ratio = params.gamma / params.nu
    m = 0
    while params.eigenvalue(m + 1) <= ratio:
        m += 1
    return m


def _rapid_threshold(params: PhysParams) -> float:
    nl1 = params.nu * params.eigenvalue(1)
    return max(
        params.mu / (4 * nl1) - 0.5,
        params.mu / (2 * (params.mu + nl1 - params.gamma)) - 0.5,
    )


def rapid_mode_count(params: PhysParams) -> int:
    """Smallest N strictly above both rapid-stabilization thresholds."""
    nl1 = params.nu * params.eigenvalue(1)
    if params.mu <= params.gamma - nl1:
        raise InvalidRateError(
            f"rapid stabilization needs mu > gamma - nu lambda_1 = {params.gamma - nl1:.6g}, got mu={params.mu}",
            lower=params.gamma - nl1,
        )
    return max(1, math.floor(_rapid_threshold(params)) + 1)


def rapid_plan(params: PhysParams) -> RatePlan:
    n = rapid_mode_count(params)
    plan = RatePlan(
        mode=RateMode.RAPID,
        mu=params.mu,
        n_modes=n,
        eta=0.0,
        instability_level=instability_level(params),
    )
    return plan.model_copy(update={"eta": predicted_eta(plan, params)})


def mu_window(params: PhysParams, n_modes: int) -> tuple[float, float]:
    """Open interval of mu for which N = n_modes modes give an L2 decay estimate."""
    gap = params.gamma - params.nu * params.eigenvalue(1)
    factor = 1 - 1 / (2 * n_modes + 1)
    if factor == 0:
        lower = -math.inf if gap < 0 else math.inf
    else:
        lower = 2 * gap / factor
    return lower, 2 * params.nu * params.eigenvalue(n_modes + 1)


def minimal_mode_plan(params: PhysParams, mu: float | None = None) -> RatePlan:
    """N = M modes with mu inside its admissible window."""
    ratio = params.gamma / params.nu
    m = instability_level(params)
    for j in (m, m + 1):
        if j >= 1 and math.isclose(params.eigenvalue(j), ratio, rel_tol=1e-12):
            raise DomainError(f"gamma/nu = {ratio} coincides with lambda_{j}")

    lower, upper = mu_window(params, m)
    mu = params.mu if mu is None else mu
    if not (lower < mu < upper):
        raise InvalidRateError(
            f"mu={mu} outside the admissible window ({lower:.6g}, {upper:.6g}) for N={m}",
            lower=lower,
            upper=upper,
        )
    plan = RatePlan(
        mode=RateMode.MINIMAL,
        mu=mu,
        n_modes=m,
        eta=0.0,
        instability_level=m,
        mu_lower=lower,
        mu_upper=upper,
    )
    return plan.model_copy(update={"eta": predicted_eta(plan, params)})


def predicted_eta(plan: RatePlan, params: PhysParams) -> float:
    base = params.nu * params.eigenvalue(1) - params.gamma
    s = 2 * plan.n_modes + 1
    if plan.mode == RateMode.RAPID:
        return base + plan.mu * (1 - 1 / s)
    return base + plan.mu / 2 * (1 - 1 / s**2)
