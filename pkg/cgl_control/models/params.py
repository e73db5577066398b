"""
Physical parameters and grids.

The plant is u_t - (nu + i alpha) u_xx - gamma u + (kappa + i beta)|u|^p u = 0
on (0, L) with u(0, t) = 0 and a Neumann control u_x(L, t). ``mu`` and
``n_modes`` are the controller's target damping and projection size.
"""

from functools import cached_property

import numpy as np
from pydantic import BaseModel, Field, computed_field, model_validator


# =============================================================================
# PLANT AND CONTROL PARAMETERS
# =============================================================================

class PhysParams(BaseModel):
    """
    All PDE coefficients plus the control pair (mu, N).

    kappa = 0 is the linear plant, in which case beta must vanish too.
    """

    nu: float = Field(..., gt=0, description="Diffusion coefficient")
    alpha: float = Field(default=0.0, description="Dispersion coefficient")
    gamma: float = Field(default=0.0, ge=0, description="Anti-damping (instability) coefficient")
    kappa: float = Field(default=0.0, ge=0, description="Nonlinear damping; 0 for the linear plant")
    beta: float = Field(default=0.0, description="Nonlinear dispersion; 0 for the linear plant")
    p: float = Field(default=2.0, ge=0, lt=4, description="Nonlinearity power")
    L: float = Field(default=1.0, gt=0, description="Domain length")
    mu: float = Field(default=0.0, ge=0, description="Target-system damping")
    n_modes: int = Field(default=1, ge=1, description="Controller mode count N")

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def check_linear_plant(self) -> "PhysParams":
        if self.kappa == 0 and self.beta != 0:
            raise ValueError("beta must be 0 when kappa = 0 (linear plant)")
        return self

    @property
    def diffusivity(self) -> complex:
        """nu + i alpha"""
        return complex(self.nu, self.alpha)

    @property
    def nonlinear_coefficient(self) -> complex:
        """kappa + i beta"""
        return complex(self.kappa, self.beta)

    @property
    def is_linear(self) -> bool:
        return self.kappa == 0

    def eigenvalue(self, j: int) -> float:
        """lambda_j = ((2j - 1)/2)^2 pi^2 / L^2 for the Dirichlet-Neumann Laplacian."""
        return ((2 * j - 1) / 2) ** 2 * np.pi**2 / self.L**2

    def with_control(self, mu: float | None = None, n_modes: int | None = None) -> "PhysParams":
        update = {}
        if mu is not None:
            update["mu"] = mu
        if n_modes is not None:
            update["n_modes"] = n_modes
        return self.model_copy(update=update)


# =============================================================================
# GRIDS
# =============================================================================

class Grid(BaseModel):
    """Uniform spatial grid x_i = i * dx, i = 0 .. n_x - 1, on [0, L]."""

    n_x: int = Field(..., ge=3, description="Node count")
    L: float = Field(default=1.0, gt=0, description="Domain length")

    model_config = {"frozen": True}

    @computed_field
    @property
    def dx(self) -> float:
        return self.L / (self.n_x - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.arange(self.n_x) * self.dx
        x[-1] = self.L
        x.flags.writeable = False
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        """Composite trapezoid weights."""
        w = np.full(self.n_x, self.dx)
        w[0] = w[-1] = self.dx / 2
        w.flags.writeable = False
        return w

    @classmethod
    def for_params(cls, params: PhysParams, n_x: int) -> "Grid":
        return cls(n_x=n_x, L=params.L)


class TimeGrid(BaseModel):
    """Uniform time levels t_n = n * dt, n = 0 .. n_t - 1, on [0, t_max]."""

    n_t: int = Field(..., ge=2, description="Number of time levels")
    t_max: float = Field(..., gt=0, description="Final time")

    model_config = {"frozen": True}

    @computed_field
    @property
    def dt(self) -> float:
        return self.t_max / (self.n_t - 1)

    @cached_property
    def times(self) -> np.ndarray:
        t = np.arange(self.n_t) * self.dt
        t[-1] = self.t_max
        t.flags.writeable = False
        return t

    @classmethod
    def from_step(cls, dt: float, t_max: float) -> "TimeGrid":
        """Smallest uniform grid with step no larger than ``dt``."""
        n_t = int(np.ceil(t_max / dt - 1e-9)) + 1
        return cls(n_t=max(n_t, 2), t_max=t_max)
