"""
Report models - value objects produced by the design and verification steps.

All reports are printable (``to_text``) and exportable (``to_dataframe``),
so the CLI and the scripts never format numbers themselves.
"""

import math
from enum import Enum

import pandas as pd
from pydantic import BaseModel, Field, computed_field


# =============================================================================
# TAXONOMIES
# =============================================================================

class Verdict(str, Enum):
    ADMISSIBLE = "admissible"
    INADMISSIBLE = "inadmissible"
    UNDETERMINED = "undetermined"   # recursion stopped at an earlier j


class RateMode(str, Enum):
    RAPID = "rapid"
    MINIMAL = "minimal"


# =============================================================================
# ADMISSIBILITY
# =============================================================================

class DenominatorEntry(BaseModel):
    """One recursion denominator d_j."""

    j: int = Field(..., ge=1)
    re: float = Field(..., description="Re d_j (NaN when not reached)")
    im: float = Field(..., description="Im d_j (NaN when not reached)")
    verdict: Verdict

    @computed_field
    @property
    def modulus(self) -> float:
        return math.hypot(self.re, self.im)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


class AdmissibilityReport(BaseModel):
    """
    Invertibility diagnostics of T_N = I + K P_N for one (mu, N) pair.

    The pair is admissible iff every d_j is reached and |d_j| exceeds the
    threshold. Operator norms are measured on the grid, not certified.
    """

    mu: float
    n_modes: int
    n_x: int
    projection: str
    threshold: float = 1e-10
    entries: list[DenominatorEntry] = Field(default_factory=list)
    norm_transform: float | None = Field(default=None, description="Measured L2 norm of T_N")
    norm_inverse: float | None = Field(default=None, description="Measured L2 norm of T_N^-1")

    @computed_field
    @property
    def admissible(self) -> bool:
        return bool(self.entries) and all(e.verdict == Verdict.ADMISSIBLE for e in self.entries)

    @computed_field
    @property
    def min_modulus(self) -> float:
        reached = [e.modulus for e in self.entries if not math.isnan(e.modulus)]
        return min(reached) if reached else math.nan

    @property
    def denominators(self) -> list[complex]:
        return [e.value for e in self.entries]

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame([
            {"j": e.j, "re_d": e.re, "im_d": e.im, "abs_d": e.modulus, "verdict": e.verdict.value}
            for e in self.entries
        ])

    def to_text(self) -> str:
        lines = [
            f"admissibility  mu={self.mu:g}  N={self.n_modes}  n_x={self.n_x}  projection={self.projection}",
            f"{'j':>3}  {'Re d_j':>12}  {'Im d_j':>12}  {'|d_j|':>12}  verdict",
        ]
        for e in self.entries:
            lines.append(f"{e.j:>3}  {e.re:>12.6f}  {e.im:>12.6f}  {e.modulus:>12.6f}  {e.verdict.value}")
        if self.norm_transform is not None:
            lines.append(f"||T_N|| = {self.norm_transform:.6g}   ||T_N^-1|| = {self.norm_inverse:.6g}")
        lines.append(f"verdict: {'admissible' if self.admissible else 'inadmissible'}")
        return "\n".join(lines)


# =============================================================================
# RATE PLANS
# =============================================================================

class RatePlan(BaseModel):
    """Chosen (mu, N) with its guaranteed decay rate."""

    mode: RateMode
    mu: float = Field(..., ge=0)
    n_modes: int = Field(..., ge=0)
    eta: float = Field(..., description="Predicted exponential decay rate")
    instability_level: int = Field(..., ge=0, description="Number of open-loop unstable modes M")
    mu_lower: float | None = Field(default=None, description="Lower end of the admissible mu window")
    mu_upper: float | None = Field(default=None, description="Upper end of the admissible mu window")

    @computed_field
    @property
    def valid(self) -> bool:
        return self.eta > 0

    def to_text(self) -> str:
        lines = [
            f"rate plan ({self.mode.value})",
            f"  instability level M = {self.instability_level}",
            f"  modes N             = {self.n_modes}",
        ]
        if self.mu_upper is not None:
            lines.append(f"  mu window           = ({self.mu_lower:.4g}, {self.mu_upper:.4g})")
            lines.append("    lower = 2 (gamma - nu lambda_1) / (1 - 1/(2N+1)), upper = 2 nu lambda_{N+1}")
        lines.append(f"  mu                  = {self.mu:g}")
        lines.append(f"  predicted eta       = {self.eta:.6g}")
        return "\n".join(lines)


# =============================================================================
# CROSS-VALIDATION
# =============================================================================

class CrossSample(BaseModel):
    x: float
    t: float
    u_fd: complex
    u_utm: complex

    @computed_field
    @property
    def abs_err(self) -> float:
        return abs(self.u_fd - self.u_utm)


class CrossValidationReport(BaseModel):
    """Finite-difference vs transform-method comparison on an (x, t) lattice."""

    samples: list[CrossSample] = Field(default_factory=list)
    tolerance: float = 1e-2

    @computed_field
    @property
    def discrepancy(self) -> float:
        """max |u_fd - u_utm| / max |u_utm|, with 0/0 read as 0."""
        if not self.samples:
            return 0.0
        err = max(s.abs_err for s in self.samples)
        scale = max(abs(s.u_utm) for s in self.samples)
        if scale == 0:
            return 0.0 if err == 0 else math.inf
        return err / scale

    @computed_field
    @property
    def passed(self) -> bool:
        return self.discrepancy <= self.tolerance

    def to_dataframe(self) -> pd.DataFrame:
        scale = max((abs(s.u_utm) for s in self.samples), default=0.0)
        return pd.DataFrame([
            {
                "x": s.x,
                "t": s.t,
                "re_u_fd": s.u_fd.real,
                "im_u_fd": s.u_fd.imag,
                "re_u_utm": s.u_utm.real,
                "im_u_utm": s.u_utm.imag,
                "rel_err": s.abs_err / scale if scale > 0 else 0.0,
            }
            for s in self.samples
        ])

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} crosscheck: discrepancy={self.discrepancy:.3e} "
            f"tolerance={self.tolerance:.1e} samples={len(self.samples)}"
        )
