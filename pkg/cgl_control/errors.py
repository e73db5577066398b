"""
Exception hierarchy for cgl-control.

Every error carries a short machine-readable ``code`` and the process
``exit_status`` the CLI maps it to. Concrete classes also derive from the
matching builtin so callers can keep catching ``ValueError`` and friends.
"""


class CGLControlError(Exception):
    """Base class for all library errors."""

    code: str = "error"
    exit_status: int = 1


# =============================================================================
# ARGUMENT ERRORS
# =============================================================================

class DimensionError(CGLControlError, ValueError):
    """Array length or matrix shape does not match its grid."""

    code = "dimension"


class DomainError(CGLControlError, ValueError):
    """Argument outside the domain of an operation."""

    code = "domain"


class ResolutionError(DomainError):
    """Grid too coarse for the requested number of modes."""

    code = "resolution"


class WindowError(DomainError):
    """Decay-fit window is empty or contains non-positive norms."""

    code = "window"


class RangeError(CGLControlError, ArithmeticError):
    """Overflow that survived exponent scaling."""

    code = "range"


class ContourSingularityError(CGLControlError, ArithmeticError):
    """A contour node landed on a zero of the spectral denominator."""

    code = "contour_singularity"


class ConfigError(CGLControlError, ValueError):
    """Experiment configuration cannot be parsed or validated."""

    code = "config"
    exit_status = 2


# =============================================================================
# CONTROL DESIGN ERRORS
# =============================================================================

class InadmissiblePairError(CGLControlError, ValueError):
    """The transform denominator d_j vanished, so (mu, N) is not admissible."""

    code = "inadmissible"
    exit_status = 3

    def __init__(self, j: int, d_j: complex, message: str | None = None):
        self.j = j
        self.d_j = d_j
        super().__init__(message or f"denominator d_{j} = {d_j:.3e} is numerically zero")


class InvalidRateError(CGLControlError, ValueError):
    """Decay-rate hypothesis violated or mu outside its admissible window."""

    code = "invalid_rate"
    exit_status = 3

    def __init__(self, message: str, lower: float | None = None, upper: float | None = None):
        self.lower = lower
        self.upper = upper
        super().__init__(message)


# =============================================================================
# NUMERICAL FAILURES
# =============================================================================

class NonConvergenceError(CGLControlError, RuntimeError):
    """An iteration hit its cap before meeting the tolerance."""

    code = "non_convergence"
    exit_status = 4

    def __init__(self, message: str, residual: float | None = None, step: int | None = None):
        self.residual = residual
        self.step = step
        super().__init__(message)


class SolverError(CGLControlError, RuntimeError):
    """Linear system singular to working precision."""

    code = "solver"
    exit_status = 4

    def __init__(self, message: str, pivot: float | None = None, step: int | None = None):
        self.pivot = pivot
        self.step = step
        super().__init__(message)


class CrosscheckFailure(CGLControlError, AssertionError):
    """Finite-difference and transform solutions disagree beyond tolerance."""

    code = "crosscheck"
    exit_status = 5

    def __init__(self, discrepancy: float, tolerance: float):
        self.discrepancy = discrepancy
        self.tolerance = tolerance
        super().__init__(f"discrepancy {discrepancy:.3e} exceeds tolerance {tolerance:.1e}")
