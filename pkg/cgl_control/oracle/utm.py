"""
Unified-transform evaluation of the open-loop linear problem

    u_t = (nu + i alpha) u_xx + gamma u + f   on (0, L),
    u(0, t) = a(t),   u_x(L, t) = b(t),   u(x, 0) = u0(x).

gamma is removed by u = e^{gamma t} w. With omega(k) = (nu + i alpha) k^2 the
solution w is a real-line integral of the data transforms plus integrals over
the boundaries of D+ and D-, the two sectors where Re omega < 0. The unknown
boundary values u_x(0, t) and u(L, t) are eliminated through the global
relation at k and -k, which leaves the denominator e^{ikL} + e^{-ikL}.

Responsibilities:
- Contour geometry (sector rays, tilt, adaptive truncation, Gauss-Legendre panels)
- Spatial and temporal transforms of sampled data
- Pointwise and field evaluation of the solution formula

The sector rays are tilted towards the real axis so that Re omega > 0 on them
and the initial-data terms decay like a Gaussian. Spatial and temporal
transforms inside the formula are integrated exactly on the piecewise-linear
interpolant of the samples (Filon style), which keeps them accurate at large
|k| and stiff omega.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.integrate

from cgl_control.errors import ContourSingularityError, DimensionError, DomainError, RangeError
from cgl_control.models.params import Grid, PhysParams, TimeGrid

logger = logging.getLogger(__name__)

SINGULARITY_THRESHOLD = 1e-14
SERIES_RADIUS = 0.5
SERIES_TERMS = 18

InitialDatum = Callable[[np.ndarray], np.ndarray] | np.ndarray
Forcing = Callable[[np.ndarray, np.ndarray], np.ndarray]


# =============================================================================
# CONFIGURATION
# =============================================================================

@dataclass
class ContourSpec:
    """
    Quadrature settings for the contour integrals.

    ``r_max = None`` selects the truncation radius per ray from the decay
    envelope; ``tilt`` is the fraction by which each sector ray is rotated
    away from its sector towards the real axis.
    """
    lambda_slope: float
    r_max: float | None = None
    n_quad: int = 8
    tilt: float = 0.5
    envelope_tol: float = 1e-16
    forcing_tol: float = 1e-8           # algebraic tail of forcing terms on the real line
    fourier_nodes: int = 2001           # samples of callable initial data and forcings
    time_nodes: int = 257               # samples of boundary data and forcings in time
    chunk_size: int = 512

    def __post_init__(self):
        if not (math.isfinite(self.lambda_slope) and self.lambda_slope > 0):
            raise DomainError(f"lambda_slope must be positive and finite, got {self.lambda_slope}")
        if self.r_max is not None and not self.r_max > 0:
            raise DomainError(f"r_max must be positive, got {self.r_max}")
        if self.n_quad < 1:
            raise DomainError(f"n_quad must be positive, got {self.n_quad}")
        if not 0 < self.tilt < 1:
            raise DomainError(f"tilt must lie in (0, 1), got {self.tilt}")
        if not (0 < self.envelope_tol < 1 and 0 < self.forcing_tol < 1):
            raise DomainError("envelope and forcing tolerances must lie in (0, 1)")
        if self.fourier_nodes < 2 or self.time_nodes < 2 or self.chunk_size < 1:
            raise DomainError("fourier_nodes and time_nodes need at least 2 samples")

    @classmethod
    def for_params(cls, params: PhysParams, **overrides) -> "ContourSpec":
        """lambda = (-alpha + sqrt(alpha^2 + nu^2)) / nu, evaluated without cancellation."""
        h = math.hypot(params.alpha, params.nu)
        if params.alpha > 0:
            lam = params.nu / (params.alpha + h)
        else:
            lam = (h - params.alpha) / params.nu
        return cls(lambda_slope=lam, **overrides)

    @property
    def sector_angles(self) -> tuple[float, float]:
        """Boundary angles of D+, between which Re omega < 0."""
        theta = math.atan(self.lambda_slope)
        return theta, theta + math.pi / 2

    @property
    def ray_angles(self) -> tuple[float, float]:
        lo, hi = self.sector_angles
        return (1 - self.tilt) * lo, hi + self.tilt * (math.pi - hi)


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet datum a(t) at x = 0 and Neumann datum b(t) at x = L; None means zero."""
    a_fn: Callable[[float], complex] | None = None
    b_fn: Callable[[float], complex] | None = None

    @classmethod
    def from_coefficients(cls, a_coeffs: list[complex] | None = None,
                          b_coeffs: list[complex] | None = None) -> "BoundaryData":
        """Polynomials in t, lowest order first."""
        def poly(coeffs):
            if not coeffs:
                return None
            c = np.asarray(coeffs, dtype=complex)
            return lambda t: complex(np.polynomial.polynomial.polyval(t, c))
        return cls(a_fn=poly(a_coeffs), b_fn=poly(b_coeffs))

    @property
    def is_zero(self) -> bool:
        return self.a_fn is None and self.b_fn is None

    def a(self, t: float) -> complex:
        return complex(self.a_fn(t)) if self.a_fn is not None else 0j

    def b(self, t: float) -> complex:
        return complex(self.b_fn(t)) if self.b_fn is not None else 0j


@dataclass(frozen=True)
class PointEvaluation:
    value: complex
    min_denominator: float
    r_max: float
    n_nodes: int


# =============================================================================
# PUBLIC TRANSFORMS
# =============================================================================

def finite_fourier(f: np.ndarray, grid: Grid, k: complex) -> complex:
    """Trapezoid value of int_0^L e^{-ikx} f(x) dx."""
    f = np.asarray(f)
    if f.shape != (grid.n_x,):
        raise DimensionError(f"field of shape {f.shape} does not match n_x={grid.n_x}")
    k = complex(k)
    shift = max(0.0, k.imag) * grid.L
    with np.errstate(over="ignore", invalid="ignore"):
        scaled = complex(grid.weights @ (f * np.exp(-1j * k * grid.nodes - shift)))
        value = scaled * np.exp(shift) if scaled != 0 else 0j
    if not np.isfinite(value):
        raise RangeError(f"finite Fourier transform overflows at k={k}")
    return value


def temporal_transform(g: np.ndarray, omega: complex, t: float, timegrid: TimeGrid) -> complex:
    """Trapezoid value of int_0^t e^{omega s} g(s) ds from samples on ``timegrid``."""
    g = np.asarray(g, dtype=complex)
    if g.shape != (timegrid.n_t,):
        raise DimensionError(f"{g.shape[0]} samples do not match n_t={timegrid.n_t}")
    if not -1e-12 <= t <= timegrid.t_max * (1 + 1e-12):
        raise DomainError(f"t={t} outside the sampled interval [0, {timegrid.t_max}]")
    times = np.asarray(timegrid.times)
    inside = times < t - 1e-12 * max(1.0, t)
    s = np.append(times[inside], t)
    values = np.append(g[inside], np.interp(t, times, g.real) + 1j * np.interp(t, times, g.imag))
    if s.size < 2:
        return 0j

    omega = complex(omega)
    shift = max(0.0, omega.real) * t
    with np.errstate(over="ignore", invalid="ignore"):
        scaled = scipy.integrate.trapezoid(np.exp(omega * s - shift) * values, s)
        value = complex(scaled) * np.exp(shift) if scaled != 0 else 0j
    if not np.isfinite(value):
        raise RangeError(f"temporal transform overflows at omega={omega}, t={t}")
    return value


# =============================================================================
# PIECEWISE-LINEAR QUADRATURE
# =============================================================================

def _linear_weights(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    A(z) = (z - 1 + e^{-z}) / z^2 and B(z) = (1 - e^{-z} - z e^{-z}) / z^2,
    so int_0^h e^{-omega s} (f_0 (1 - s/h) + f_1 s/h) ds = h (A f_0 + B f_1)
    with z = omega h. Taylor series near z = 0.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    small = np.abs(z) < SERIES_RADIUS
    zs = np.where(small, 1.0, z)
    e = np.exp(-zs)
    a = (zs - 1 + e) / zs**2
    b = (1 - e - zs * e) / zs**2
    if np.any(small):
        mz = -z[small]
        sa = np.zeros_like(mz)
        sb = np.zeros_like(mz)
        term = np.ones_like(mz)     # (-z)^n / n!
        for n in range(SERIES_TERMS):
            sa += term / ((n + 1) * (n + 2))
            sb += term / (n + 2)
            term = term * mz / (n + 1)
        a[small] = sa
        b[small] = sb
    return a, b


def _damped_weights(omega: np.ndarray, t: float, n: int) -> np.ndarray:
    """W with int_0^t e^{-omega (t - s)} phi(s) ds = W @ phi(s_m), s_m = m t / (n - 1)."""
    h = t / (n - 1)
    lag = np.maximum(t - h * np.arange(1, n), 0.0)
    decay = np.exp(-np.outer(omega, lag))
    a, b = _linear_weights(omega * h)
    w = np.zeros((omega.size, n), dtype=complex)
    w[:, 1:] += h * decay * a[:, None]
    w[:, :-1] += h * decay * b[:, None]
    return w


def _shifted_transform(k: np.ndarray, c: float, y: np.ndarray, f: np.ndarray) -> np.ndarray:
    """int_0^L e^{ik(c - y)} f(y) dy for f piecewise linear on the uniform nodes y."""
    h = y[1] - y[0]
    a, b = _linear_weights(1j * k * h)
    phase = np.exp(1j * np.outer(k, c - y[:-1]))
    if f.ndim == 2:
        a, b = a[:, None], b[:, None]
    return h * (a * (phase @ f[:-1]) + b * (phase @ f[1:]))


# =============================================================================
# EVALUATOR
# =============================================================================

@dataclass(frozen=True)
class _Ray:
    angle: float
    sign: int
    side: str   # "real", "upper" or "lower"


class SolutionFormula:
    """Samples of the data at one time t, reused for every x."""

    def __init__(self, u0: InitialDatum, bdry: BoundaryData, forcing: Forcing | None,
                 params: PhysParams, spec: ContourSpec, t: float):
        self.params = params
        self.spec = spec
        self.t = t
        self.L = params.L
        self.c = params.diffusivity

        if callable(u0):
            self.y0 = np.linspace(0.0, self.L, spec.fourier_nodes)
            self.u0 = np.broadcast_to(np.asarray(u0(self.y0), dtype=complex), self.y0.shape).copy()
        else:
            self.u0 = np.asarray(u0, dtype=complex)
            if self.u0.ndim != 1 or self.u0.size < 2:
                raise DimensionError(f"initial datum of shape {self.u0.shape} is not a sampled field")
            self.y0 = np.linspace(0.0, self.L, self.u0.size)

        self.s = np.linspace(0.0, t, spec.time_nodes)
        damping = np.exp(-params.gamma * self.s)
        self.has_boundary = not bdry.is_zero
        if self.has_boundary:
            self.g0 = damping * np.array([bdry.a(si) for si in self.s])
            self.h1 = damping * np.array([bdry.b(si) for si in self.s])
            if abs(bdry.a(0.0) - self.u0[0]) > 1e-8:
                logger.warning(f"a(0) = {bdry.a(0.0):.4g} differs from u0(0) = {self.u0[0]:.4g}")

        self.has_forcing = forcing is not None
        if self.has_forcing:
            self.yf = np.linspace(0.0, self.L, spec.fourier_nodes)
            y, s = np.meshgrid(self.yf, self.s, indexing="ij")
            self.forcing = np.broadcast_to(np.asarray(forcing(y, s), dtype=complex), y.shape) * damping[None, :]

    # -------------------------------------------------------------------------
    # Integrands
    # -------------------------------------------------------------------------

    def _data(self, k: np.ndarray, shift: float, omega: np.ndarray, weights: np.ndarray | None) -> np.ndarray:
        """e^{-omega t} int e^{ik(shift - y)} u0 + int_0^t e^{-omega (t - s)} int e^{ik(shift - y)} f(., s)"""
        decay = np.exp(-omega * self.t)
        if np.max(np.abs(decay)) < self.spec.envelope_tol**2:
            value = np.zeros(k.shape, dtype=complex)
        else:
            value = decay * _shifted_transform(k, shift, self.y0, self.u0)
        if self.has_forcing:
            value = value + np.sum(weights * _shifted_transform(k, shift, self.yf, self.forcing), axis=1)
        return value

    def integrand(self, side: str, k: np.ndarray, x: float) -> tuple[np.ndarray, float]:
        L = self.L
        omega = self.c * k**2
        weights = None
        if self.has_forcing or self.has_boundary:
            weights = _damped_weights(omega, self.t, self.s.size)

        if side == "real":
            return self._data(k, x, omega, weights) / (2 * np.pi), math.inf

        if side == "upper":
            den = 1 + np.exp(2j * k * L)
            value = -(self._data(k, x + 2 * L, omega, weights) + self._data(-k, -x, omega, weights)) / (2 * np.pi)
            if self.has_boundary:
                value -= self.c / np.pi * (
                    np.exp(1j * k * (x + L)) * (weights @ self.h1)
                    + 1j * k * np.exp(1j * k * x) * (weights @ self.g0)
                )
        else:
            den = 1 + np.exp(-2j * k * L)
            value = (self._data(k, x - 2 * L, omega, weights) - self._data(-k, 2 * L - x, omega, weights)) / (2 * np.pi)
            if self.has_boundary:
                value -= self.c / np.pi * (
                    np.exp(1j * k * (x - L)) * (weights @ self.h1)
                    + 1j * k * np.exp(1j * k * (x - 2 * L)) * (weights @ self.g0)
                )

        min_den = float(np.min(np.abs(den)))
        if min_den < SINGULARITY_THRESHOLD:
            raise ContourSingularityError(f"|1 + e^(+-2ikL)| = {min_den:.2e} on the {side} contour")
        return value / den, min_den

    # -------------------------------------------------------------------------
    # Contours
    # -------------------------------------------------------------------------

    def rays(self) -> list[_Ray]:
        psi1, psi2 = self.spec.ray_angles
        return [
            _Ray(0.0, 1, "real"),
            _Ray(np.pi, -1, "real"),
            _Ray(psi1, 1, "upper"),
            _Ray(psi2, -1, "upper"),
            _Ray(psi1 + np.pi, 1, "lower"),
            _Ray(psi2 + np.pi, -1, "lower"),
        ]

    def radii(self, ray: _Ray, x: float) -> tuple[float, float, float]:
        """(Gaussian radius, total radius, phase speed) of one ray."""
        rotated = self.c * np.exp(2j * ray.angle)
        rate = rotated.real
        log_tol = math.log(1 / self.spec.envelope_tol)
        r_gauss = math.sqrt(log_tol / (rate * self.t))
        r_total = r_gauss
        if ray.side == "real":
            if self.has_forcing:
                r_total = max(r_total, self.spec.forcing_tol ** (-1 / 3))
        elif self.has_boundary or self.has_forcing:
            dist = x if ray.side == "upper" else self.L - x
            r_total = max(r_total, log_tol / (abs(math.sin(ray.angle)) * dist))
        if self.spec.r_max is not None:
            r_gauss = min(r_gauss, self.spec.r_max)
            r_total = self.spec.r_max
        return r_gauss, r_total, abs(rotated.imag)

    def nodes(self, r_gauss: float, r_total: float, phase_speed: float) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre panels; about one radian of phase per panel."""
        gl_x, gl_w = np.polynomial.legendre.leggauss(self.spec.n_quad)
        width_inner = 1.0 / (3 * self.L + 2 * phase_speed * r_gauss * self.t)
        edges = np.linspace(0.0, r_gauss, max(1, math.ceil(r_gauss / width_inner)) + 1)
        if r_total > r_gauss:
            outer = np.linspace(r_gauss, r_total, max(1, math.ceil((r_total - r_gauss) * 3 * self.L)) + 1)
            edges = np.concatenate([edges, outer[1:]])
        half = np.diff(edges) / 2
        mid = (edges[:-1] + edges[1:]) / 2
        r = (mid[:, None] + half[:, None] * gl_x[None, :]).ravel()
        w = (half[:, None] * gl_w[None, :]).ravel()
        return r, w

    def evaluate(self, x: float) -> PointEvaluation:
        total = 0j
        min_den = math.inf
        r_max = 0.0
        n_nodes = 0
        chunk = self.spec.chunk_size
        for ray in self.rays():
            r_gauss, r_total, speed = self.radii(ray, x)
            r, w = self.nodes(r_gauss, r_total, speed)
            direction = np.exp(1j * ray.angle)
            for start in range(0, r.size, chunk):
                values, den = self.integrand(ray.side, r[start : start + chunk] * direction, x)
                total += ray.sign * direction * np.sum(values * w[start : start + chunk])
                min_den = min(min_den, den)
            r_max = max(r_max, r_total)
            n_nodes += r.size

        value = complex(np.exp(self.params.gamma * self.t) * total)
        if not np.isfinite(value):
            raise RangeError(f"solution formula overflowed at (x, t) = ({x}, {self.t})")
        return PointEvaluation(value=value, min_denominator=min_den, r_max=r_max, n_nodes=n_nodes)


# =============================================================================
# PUBLIC EVALUATION
# =============================================================================

def prepare_formula(
    u0: InitialDatum,
    bdry: BoundaryData | None,
    forcing: Forcing | None,
    params: PhysParams,
    contour: ContourSpec | None,
    t: float,
) -> SolutionFormula:
    """Data sampled once at time t; evaluate(x) then gives the solution at any x."""
    if not params.is_linear:
        raise DomainError("the transform solution applies to the linear plant (kappa = 0)")
    if not t > 0:
        raise DomainError(f"evaluation time must be positive, got t={t}")
    spec = contour or ContourSpec.for_params(params)
    return SolutionFormula(u0, bdry or BoundaryData(), forcing, params, spec, t)


def _check_x(x: float, L: float):
    if not 0 < x < L:
        raise DomainError(f"x={x} must lie strictly inside (0, {L})")


def evaluate_point(
    u0: InitialDatum,
    bdry: BoundaryData | None,
    forcing: Forcing | None,
    params: PhysParams,
    contour: ContourSpec | None,
    x: float,
    t: float,
) -> PointEvaluation:
    """Solution value at (x, t) with quadrature diagnostics."""
    _check_x(x, params.L)
    return prepare_formula(u0, bdry, forcing, params, contour, t).evaluate(x)


def evaluate_solution(
    u0: InitialDatum,
    bdry: BoundaryData | None,
    forcing: Forcing | None,
    params: PhysParams,
    contour: ContourSpec | None,
    x: float,
    t: float,
) -> complex:
    """
    u(x, t) of the open-loop linear problem.

    ``u0`` is a callable of x or samples on a uniform grid over [0, L];
    ``forcing`` is a callable f(x, t) that broadcasts over arrays, or None.
    """
    return evaluate_point(u0, bdry, forcing, params, contour, x, t).value


def evaluate_field(
    u0: InitialDatum,
    bdry: BoundaryData | None,
    forcing: Forcing | None,
    params: PhysParams,
    contour: ContourSpec | None,
    xs: np.ndarray,
    t: float,
) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    for x in xs:
        _check_x(x, params.L)
    formula = prepare_formula(u0, bdry, forcing, params, contour, t)
    return np.array([formula.evaluate(x).value for x in xs])
