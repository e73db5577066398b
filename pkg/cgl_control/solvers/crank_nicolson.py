"""
Crank-Nicolson steppers for the controlled plant.

Interior rows discretize u_t + A u = N(u) with A = -(nu + i alpha) Delta - gamma I.
The Dirichlet node is eliminated from the unknowns so u(0) is exact; the last
row is the one-sided Neumann stencil (3u_N - 4u_{N-1} + u_{N-2}) / (2 dx) = g.
The reduced system has one super- and two sub-diagonals and is solved by
banded LU with partial pivoting.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from cgl_control.control.controller import ControlLaw, feedback
from cgl_control.errors import DimensionError, DomainError, NonConvergenceError, SolverError
from cgl_control.models.params import Grid, PhysParams, TimeGrid
from cgl_control.numerics.discretization import neumann_stencil
from cgl_control.numerics.transform import ProjectionWeights, build_projection, eigen_basis
from cgl_control.solvers.base import BaseStepper, RunRecord

logger = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    """Linear-algebra settings."""
    dense_threshold: int = 64   # below this n_x the reduced system is solved densely


@dataclass
class PicardConfig:
    """Fixed-point settings for the nonlinear step."""
    tol: float = 1e-10
    max_iters: int = 50


# =============================================================================
# SYSTEM MATRICES
# =============================================================================

@dataclass(frozen=True)
class SystemMatrices:
    """
    Constant-coefficient pieces of the scheme, stored by diagonals.

    r = dt (nu + i alpha) / (2 dx^2); interior rows of I + dt/2 A are
    (-r, 1 + 2r - dt gamma / 2, -r) and of I - dt/2 A are
    (r, 1 - 2r + dt gamma / 2, r).
    """
    grid: Grid
    dt: float
    r: complex
    lhs_diag: complex
    rhs_diag: complex
    gamma: float
    diffusivity: complex
    config: SolverConfig

    @classmethod
    def assemble(cls, params: PhysParams, grid: Grid, dt: float, config: SolverConfig | None = None):
        c = params.diffusivity
        r = dt * c / (2 * grid.dx**2)
        return cls(
            grid=grid,
            dt=dt,
            r=r,
            lhs_diag=1 + 2 * r - dt * params.gamma / 2,
            rhs_diag=1 - 2 * r + dt * params.gamma / 2,
            gamma=params.gamma,
            diffusivity=c,
            config=config or SolverConfig(),
        )

    @property
    def n(self) -> int:
        return self.grid.n_x

    # -------------------------------------------------------------------------
    # Dense views
    # -------------------------------------------------------------------------

    @cached_property
    def a_matrix(self) -> np.ndarray:
        """A on interior rows; boundary rows are zero."""
        n, h2 = self.n, self.grid.dx**2
        a = np.zeros((n, n), dtype=complex)
        i = np.arange(1, n - 1)
        a[i, i] = 2 * self.diffusivity / h2 - self.gamma
        a[i, i - 1] = a[i, i + 1] = -self.diffusivity / h2
        return a

    @cached_property
    def lhs(self) -> np.ndarray:
        """I + dt/2 A with the Dirichlet and Neumann rows in place."""
        m = np.eye(self.n, dtype=complex) + self.dt / 2 * self.a_matrix
        m[0, :] = 0
        m[0, 0] = 1
        m[-1, :] = 0
        m[-1, -3:] = np.array([1, -4, 3]) / (2 * self.grid.dx)
        return m

    @cached_property
    def rhs_op(self) -> np.ndarray:
        """I - dt/2 A with zeroed boundary rows."""
        m = np.eye(self.n, dtype=complex) - self.dt / 2 * self.a_matrix
        m[0, :] = 0
        m[-1, :] = 0
        return m

    # -------------------------------------------------------------------------
    # Matrix-free application
    # -------------------------------------------------------------------------

    def apply_rhs(self, u: np.ndarray) -> np.ndarray:
        """(I - dt/2 A) u on interior rows, zero on boundary rows."""
        out = np.zeros(self.n, dtype=complex)
        out[1:-1] = self.rhs_diag * u[1:-1] + self.r * (u[:-2] + u[2:])
        return out

    def apply_lhs(self, u: np.ndarray) -> np.ndarray:
        """(I + dt/2 A) u on interior rows, zero on boundary rows."""
        out = np.zeros(self.n, dtype=complex)
        out[1:-1] = self.lhs_diag * u[1:-1] - self.r * (u[:-2] + u[2:])
        return out

    # -------------------------------------------------------------------------
    # Solve
    # -------------------------------------------------------------------------

    def solve(
        self,
        rhs: np.ndarray,
        dirichlet: complex,
        neumann: complex,
        extra_diag: np.ndarray | None = None,
    ) -> np.ndarray:
        """
        Solve (lhs + diag(extra_diag) on interior rows) u = rhs with
        u_0 = dirichlet and the Neumann row equal to ``neumann``.
        """
        n, m, h = self.n, self.n - 1, self.grid.dx
        diag = np.full(m, self.lhs_diag, dtype=complex)
        if extra_diag is not None:
            diag[: m - 1] += extra_diag[1:-1]

        # ab[1 + i - j, j] = M[i, j] for one super- and two sub-diagonals
        ab = np.zeros((4, m), dtype=complex)
        ab[1, :] = diag
        ab[0, 1:] = -self.r
        ab[2, : m - 2] = -self.r
        ab[1, m - 1] = 3 / (2 * h)
        ab[2, m - 2] = -4 / (2 * h)

        b = np.array(rhs[1:], dtype=complex)
        b[0] += self.r * dirichlet
        b[m - 1] = neumann
        if m >= 3:
            ab[3, m - 3] = 1 / (2 * h)
        else:
            b[m - 1] -= dirichlet / (2 * h)

        try:
            if n < self.config.dense_threshold:
                interior = self._dense_from_banded(ab)
                x = scipy.linalg.solve(interior, b, check_finite=False)
            else:
                x = scipy.linalg.solve_banded((2, 1), ab, b, check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as e:
            _, _, upper = scipy.linalg.lu(self._dense_from_banded(ab))
            pivot = float(np.min(np.abs(np.diag(upper))))
            raise SolverError(f"singular Crank-Nicolson system ({e}); smallest pivot {pivot:.3e}", pivot=pivot)
        return np.concatenate(([dirichlet], x))

    @staticmethod
    def _dense_from_banded(ab: np.ndarray) -> np.ndarray:
        m = ab.shape[1]
        dense = np.zeros((m, m), dtype=complex)
        for i in range(m):
            for j in range(max(0, i - 2), min(m, i + 2)):
                dense[i, j] = ab[1 + i - j, j]
        return dense


# =============================================================================
# STEPPERS
# =============================================================================

class LinearCrankNicolson(BaseStepper):
    """
    Linear plant. The Neumann datum g^n = feedback(u^n) is explicit; without
    a law the boundary is homogeneous Neumann.
    """

    name = "linear Crank-Nicolson"

    def __init__(self, params: PhysParams, grid: Grid, timegrid: TimeGrid,
                 law: ControlLaw | None = None, config: SolverConfig | None = None):
        super().__init__(params, grid, timegrid)
        self.law = law
        self.mats = SystemMatrices.assemble(params, grid, timegrid.dt, config)

    def boundary_value(self, state: np.ndarray, n: int) -> complex:
        return feedback(self.law, state, self.grid) if self.law is not None else 0j

    def step(self, state: np.ndarray, n: int) -> tuple[np.ndarray, int, complex]:
        g = self.boundary_value(state, n)
        return self.mats.solve(self.mats.apply_rhs(state), 0.0, g), 0, g


class OpenLoopCrankNicolson(BaseStepper):
    """Linear plant with prescribed u(0, t) = a(t), u_x(L, t) = b(t) at the new level."""

    name = "open-loop Crank-Nicolson"

    def __init__(self, params: PhysParams, grid: Grid, timegrid: TimeGrid,
                 a_fn: Callable[[float], complex], b_fn: Callable[[float], complex],
                 config: SolverConfig | None = None):
        super().__init__(params, grid, timegrid)
        self.a_fn = a_fn
        self.b_fn = b_fn
        self.mats = SystemMatrices.assemble(params, grid, timegrid.dt, config)

    def dirichlet_value(self, t: float) -> complex:
        return complex(self.a_fn(t))

    def boundary_value(self, state: np.ndarray, n: int) -> complex:
        return complex(self.b_fn(self.timegrid.times[min(n + 1, self.timegrid.n_t - 1)]))

    def step(self, state: np.ndarray, n: int) -> tuple[np.ndarray, int, complex]:
        t_next = self.timegrid.times[n + 1]
        b = self.boundary_value(state, n)
        new = self.mats.solve(self.mats.apply_rhs(state), self.dirichlet_value(t_next), b)
        return new, 0, b


class PicardCrankNicolson(BaseStepper):
    """
    Nonlinear plant. Each sweep solves for the update du with the modulus
    |u^{n,s}|^p frozen and the Neumann datum g^{n,s} = feedback(u^{n,s}).
    """

    name = "Picard Crank-Nicolson"

    def __init__(self, params: PhysParams, grid: Grid, timegrid: TimeGrid,
                 law: ControlLaw | None = None, config: PicardConfig | None = None,
                 solver_config: SolverConfig | None = None):
        super().__init__(params, grid, timegrid)
        if params.kappa <= 0:
            raise DomainError("the Picard stepper needs kappa > 0")
        self.law = law
        self.config = config or PicardConfig()
        self.mats = SystemMatrices.assemble(params, grid, timegrid.dt, solver_config)

    def boundary_value(self, state: np.ndarray, n: int) -> complex:
        return feedback(self.law, state, self.grid) if self.law is not None else 0j

    def step(self, state: np.ndarray, n: int) -> tuple[np.ndarray, int, complex]:
        mats = self.mats
        half = mats.dt / 2 * self.params.nonlinear_coefficient
        p = self.params.p

        # (|u|^2)^(p/2) gives 0 at zeros for p > 0 and 1 for p = 0
        rhs_n = mats.apply_rhs(state)
        rhs_n[1:-1] -= half * state[1:-1] * np.power(np.abs(state[1:-1]) ** 2, p / 2)

        current = state.copy()
        residual = np.inf
        for sweep in range(1, self.config.max_iters + 1):
            modulus = np.power(np.abs(current) ** 2, p / 2)
            g = self.boundary_value(current, n)
            rhs = rhs_n - mats.apply_lhs(current)
            rhs[1:-1] -= half * current[1:-1] * modulus[1:-1]
            du = mats.solve(
                rhs,
                dirichlet=-current[0],
                neumann=g - neumann_stencil(current, self.grid.dx),
                extra_diag=half * modulus,
            )
            current = current + du
            residual = float(np.max(np.abs(du)))
            self.logger.debug(f"step {n} sweep {sweep}: max|du| = {residual:.3e}")
            if residual < self.config.tol:
                return current, sweep, g

        raise NonConvergenceError(
            f"Picard iteration did not converge in {self.config.max_iters} sweeps "
            f"(last max|du| = {residual:.3e}); reduce dt",
            residual=residual,
            step=n,
        )


class TargetCrankNicolson(BaseStepper):
    """
    Target system w_t = (nu + i alpha) w_xx + gamma w - mu P_N w with
    w(0) = 0 and w_x(L) = 0. The rank-N term makes the matrix dense, so it
    is LU-factorized once.
    """

    name = "target Crank-Nicolson"

    def __init__(self, params: PhysParams, grid: Grid, timegrid: TimeGrid,
                 projection: ProjectionWeights = ProjectionWeights.TRAPEZOID):
        super().__init__(params, grid, timegrid)
        mats = SystemMatrices.assemble(params, grid, timegrid.dt)
        proj = build_projection(eigen_basis(grid, params.n_modes), grid, projection).entries
        damping = mats.dt / 2 * params.mu * proj
        lhs = mats.lhs.copy()
        lhs[1:-1] += damping[1:-1]
        self._rhs = mats.rhs_op.copy()
        self._rhs[1:-1] -= damping[1:-1]
        self._lu = scipy.linalg.lu_factor(lhs)

    def boundary_value(self, state: np.ndarray, n: int) -> complex:
        return 0j

    def step(self, state: np.ndarray, n: int) -> tuple[np.ndarray, int, complex]:
        return scipy.linalg.lu_solve(self._lu, self._rhs @ state), 0, 0j


# =============================================================================
# FUNCTIONAL INTERFACE
# =============================================================================

def step_linear(state: np.ndarray, mats: SystemMatrices, law: ControlLaw | None) -> np.ndarray:
    """One closed-loop step with g^n = feedback(u^n)."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (mats.n,):
        raise DimensionError(f"state of shape {state.shape} does not match n_x={mats.n}")
    g = feedback(law, state, mats.grid) if law is not None else 0j
    return mats.solve(mats.apply_rhs(state), 0.0, g)


def step_nonlinear(
    state: np.ndarray,
    mats: SystemMatrices,
    law: ControlLaw | None,
    params: PhysParams,
    tol: float = 1e-10,
    max_iters: int = 50,
) -> tuple[np.ndarray, int]:
    state = np.asarray(state, dtype=complex)
    if state.shape != (mats.n,):
        raise DimensionError(f"state of shape {state.shape} does not match n_x={mats.n}")
    stepper = PicardCrankNicolson(
        params, mats.grid, TimeGrid(n_t=2, t_max=mats.dt), law,
        PicardConfig(tol=tol, max_iters=max_iters), mats.config,
    )
    new, sweeps, _ = stepper.step(state, 0)
    return new, sweeps


def run(
    params: PhysParams,
    grid: Grid,
    timegrid: TimeGrid,
    law: ControlLaw | None,
    u0: np.ndarray,
    picard: PicardConfig | None = None,
    label: str = "",
) -> RunRecord:
    """Linear or Picard stepper depending on kappa; no law means u_x(L) = 0."""
    if params.is_linear:
        stepper = LinearCrankNicolson(params, grid, timegrid, law)
    else:
        stepper = PicardCrankNicolson(params, grid, timegrid, law, picard)
    return stepper.run(u0, label=label)


def run_target(
    params: PhysParams,
    grid: Grid,
    timegrid: TimeGrid,
    w0: np.ndarray,
    projection: ProjectionWeights = ProjectionWeights.TRAPEZOID,
) -> RunRecord:
    return TargetCrankNicolson(params, grid, timegrid, projection).run(w0, label="target")
