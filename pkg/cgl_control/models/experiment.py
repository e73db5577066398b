"""
Experiment configuration - one YAML file per experiment under configs/.

The file is parsed into ExperimentConfig, which validates the plant type
against the coefficients and carries a hash of its own canonical form so
every output can be traced back to the exact configuration that made it.
"""

import json
from enum import Enum
from hashlib import sha256
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field, ValidationError, computed_field, field_validator, model_validator

from cgl_control.errors import ConfigError
from cgl_control.models.params import PhysParams
from cgl_control.models.reports import RateMode


# =============================================================================
# TAXONOMIES
# =============================================================================

class PlantKind(str, Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"
    UNCONTROLLED = "uncontrolled"


# =============================================================================
# SECTIONS
# =============================================================================

class InitialDatum(BaseModel):
    """
    A named preset, or sums of sin(k pi x / L) and of eigenmodes e_j with
    complex coefficients given as separate real and imaginary lists.
    """

    preset: str | None = Field(default=None, description="exp1, exp2 or zero")
    sine_re: list[float] = Field(default_factory=list)
    sine_im: list[float] = Field(default_factory=list)
    eigen_re: list[float] = Field(default_factory=list)
    eigen_im: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_one_source(self) -> "InitialDatum":
        has_series = any([self.sine_re, self.sine_im, self.eigen_re, self.eigen_im])
        if self.preset is not None and has_series:
            raise ValueError("give either a preset or coefficient lists, not both")
        return self


class PicardSettings(BaseModel):
    tol: float = Field(default=1e-10, gt=0, description="Stop when max|du| < tol")
    max_iters: int = Field(default=50, ge=1, description="Sweep cap per time step")


class CrosscheckSettings(BaseModel):
    """Open-loop data and quadrature for the transform-method comparison."""

    tolerance: float = Field(default=1e-2, gt=0)
    a_re: list[float] = Field(default_factory=list, description="Dirichlet datum, polynomial in t")
    a_im: list[float] = Field(default_factory=list)
    b_re: list[float] = Field(default_factory=list, description="Neumann datum, polynomial in t")
    b_im: list[float] = Field(default_factory=list)
    r_max: float | None = Field(default=None, gt=0, description="None selects the radius adaptively")
    n_quad: int = Field(default=8, ge=1)
    fourier_nodes: int = Field(default=2001, ge=2)
    time_nodes: int = Field(default=257, ge=2)

    @staticmethod
    def _combine(re: list[float], im: list[float]) -> list[complex]:
        n = max(len(re), len(im))
        re = list(re) + [0.0] * (n - len(re))
        im = list(im) + [0.0] * (n - len(im))
        return [complex(a, b) for a, b in zip(re, im)]

    @property
    def a_coefficients(self) -> list[complex]:
        return self._combine(self.a_re, self.a_im)

    @property
    def b_coefficients(self) -> list[complex]:
        return self._combine(self.b_re, self.b_im)


# =============================================================================
# EXPERIMENT
# =============================================================================

class ExperimentConfig(BaseModel):
    """
    Everything one CLI invocation needs.

    ``plant: uncontrolled`` is shorthand for the plant given by kappa with
    ``control: false``.
    """

    name: str = Field(..., min_length=1)
    plant: PlantKind
    control: bool = Field(default=True, description="False runs with u_x(L) = 0")
    params: PhysParams

    n_x: int = Field(default=201, ge=3)
    n_t: int = Field(default=2001, ge=2)
    t_max: float = Field(default=1.0, gt=0)

    initial: InitialDatum = Field(default_factory=lambda: InitialDatum(preset="zero"))
    rate_mode: RateMode | None = Field(default=RateMode.MINIMAL, description="None skips the rate plan")
    projection: Literal["trapezoid", "rectangle"] = "trapezoid"
    picard: PicardSettings = Field(default_factory=PicardSettings)
    crosscheck: CrosscheckSettings | None = None
    fit_window: tuple[float, float] | None = Field(default=None, description="Decay-fit window (t_a, t_b)")

    dump_kernel: bool = False
    seed: int = 0
    out_dir: str | None = None

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="before")
    @classmethod
    def expand_uncontrolled(cls, data):
        if isinstance(data, dict) and data.get("plant") in ("uncontrolled", PlantKind.UNCONTROLLED):
            params = data.get("params") or {}
            kappa = params.kappa if isinstance(params, PhysParams) else float(params.get("kappa", 0.0))
            data = {**data, "plant": "nonlinear" if kappa > 0 else "linear", "control": False}
        return data

    @field_validator("fit_window")
    @classmethod
    def check_window(cls, v):
        if v is not None and not v[0] < v[1]:
            raise ValueError(f"fit_window must satisfy t_a < t_b, got {v}")
        return v

    @model_validator(mode="after")
    def check_plant(self) -> "ExperimentConfig":
        if self.plant == PlantKind.LINEAR and not self.params.is_linear:
            raise ValueError("plant 'linear' needs kappa = 0")
        if self.plant == PlantKind.NONLINEAR and self.params.is_linear:
            raise ValueError("plant 'nonlinear' needs kappa > 0")
        return self

    # =========================================================================
    # COMPUTED FIELDS
    # =========================================================================

    @computed_field
    @property
    def config_hash(self) -> str:
        """sha256 of the canonical JSON form, output directory excluded."""
        payload = self.to_dict()
        payload.pop("out_dir", None)
        content = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return sha256(content.encode()).hexdigest()[:16]

    @property
    def dt(self) -> float:
        return self.t_max / (self.n_t - 1)

    # =========================================================================
    # SERIALIZATION
    # =========================================================================

    def to_dict(self) -> dict:
        return self.model_dump(mode="json", include=set(type(self).model_fields))

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        """Copy with CLI overrides applied and re-validated; None values are ignored."""
        update = {k: v for k, v in overrides.items() if v is not None}
        try:
            return type(self).model_validate({**self.to_dict(), **update})
        except ValidationError as e:
            raise ConfigError(f"invalid override: {_first_error(e)}")


def _first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    where = ".".join(str(p) for p in err["loc"]) or "config"
    return f"{where}: {err['msg']}"


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"malformed YAML: {e}".splitlines()[0])
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a YAML mapping")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_first_error(e))


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}")
    return parse_config(text)


def dump_config(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)
