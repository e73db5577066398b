"""
Base stepper class for time integration.
All steppers should inherit from BaseStepper.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
import logging

import numpy as np
import pandas as pd

from cgl_control.errors import CGLControlError, DimensionError, SolverError
from cgl_control.models.params import Grid, PhysParams, TimeGrid
from cgl_control.numerics.discretization import norm_h1, norm_l2

logger = logging.getLogger(__name__)


@dataclass
class RunRecord:
    """
    Norm and feedback histories of one simulation.

    ``feedback_history[n]`` is the boundary value used to advance from t_n to
    t_{n+1}; its last entry is the value the law would apply at t_max.
    ``picard_iters[n]`` is the sweep count that produced level n (0 at n = 0
    and for linear steppers).
    """
    times: np.ndarray
    l2_history: np.ndarray
    h1_history: np.ndarray
    feedback_history: np.ndarray
    picard_iters: np.ndarray
    final_state: np.ndarray
    label: str = ""
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "l2": self.l2_history,
            "h1": self.h1_history,
            "re_g": self.feedback_history.real,
            "im_g": self.feedback_history.imag,
            "picard_iters": self.picard_iters,
        })

    def final_state_frame(self, grid: Grid) -> pd.DataFrame:
        u = self.final_state
        return pd.DataFrame({"x": grid.nodes, "re_u": u.real, "im_u": u.imag, "abs_u": np.abs(u)})

    def stats(self) -> dict:
        """Summary numbers for reports."""
        return {
            "steps": len(self.times) - 1,
            "h1_initial": float(self.h1_history[0]),
            "h1_final": float(self.h1_history[-1]),
            "h1_ratio": float(self.h1_history[-1] / self.h1_history[0]) if self.h1_history[0] > 0 else 0.0,
            "max_picard_iters": int(self.picard_iters.max()) if len(self.picard_iters) else 0,
        }


class BaseStepper(ABC):
    """
    Abstract base class for all time steppers.

    Each stepper must implement:
    - step(): advance the state by one time level
    - boundary_value(): the Neumann datum applied at a given level
    """

    name: str

    def __init__(self, params: PhysParams, grid: Grid, timegrid: TimeGrid):
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")
        self.params = params
        self.grid = grid
        self.timegrid = timegrid

    @abstractmethod
    def step(self, state: np.ndarray, n: int) -> tuple[np.ndarray, int, complex]:
        """
        Advance from level n to n + 1.
        Returns the new state, the sweep count and the boundary value used.
        """
        pass

    @abstractmethod
    def boundary_value(self, state: np.ndarray, n: int) -> complex:
        pass

    def dirichlet_value(self, t: float) -> complex:
        return 0.0

    def prepare(self, u0: np.ndarray) -> np.ndarray:
        """Validate the initial datum and project it onto the Dirichlet condition."""
        u0 = np.array(u0, dtype=complex)
        if u0.shape != (self.grid.n_x,):
            raise DimensionError(f"initial datum of shape {u0.shape} does not match n_x={self.grid.n_x}")
        a0 = self.dirichlet_value(0.0)
        if abs(u0[0] - a0) > 1e-12:
            self.logger.warning(f"u0(0) = {u0[0]:.4g} incompatible with Dirichlet value {a0}; projecting")
            u0[0] = a0
        return u0

    def run(self, u0: np.ndarray, label: str = "", snapshot_steps: set[int] | None = None) -> RunRecord:
        """
        Iterate the stepper over the whole time grid, keeping copies of the
        state at the levels listed in ``snapshot_steps``.
        Errors are logged and re-raised with the failing step attached.
        """
        n_t = self.timegrid.n_t
        l2 = np.empty(n_t)
        h1 = np.empty(n_t)
        g = np.zeros(n_t, dtype=complex)
        iters = np.zeros(n_t, dtype=int)
        wanted = set(snapshot_steps or ())
        snapshots = {}

        n = 0
        try:
            self.logger.info(f"Starting {self.name} run: n_x={self.grid.n_x}, n_t={n_t}, dt={self.timegrid.dt:.3g}")
            state = self.prepare(u0)
            l2[0] = norm_l2(state, self.grid)
            h1[0] = norm_h1(state, self.grid)
            if 0 in wanted:
                snapshots[0] = state.copy()
            for n in range(n_t - 1):
                state, iters[n + 1], g[n] = self.step(state, n)
                if not np.all(np.isfinite(state)):
                    raise SolverError("state became non-finite", step=n)
                l2[n + 1] = norm_l2(state, self.grid)
                h1[n + 1] = norm_h1(state, self.grid)
                if n + 1 in wanted:
                    snapshots[n + 1] = state.copy()
            g[-1] = self.boundary_value(state, n_t - 1)
            self.logger.info(f"Finished {self.name} run: H1 {h1[0]:.4g} -> {h1[-1]:.4g}")
        except CGLControlError as e:
            if getattr(e, "step", None) is None and hasattr(e, "step"):
                e.step = n
            self.logger.error(f"Error in {self.name} run at step {n}: {e}")
            raise
        except Exception as e:
            self.logger.error(f"Error in {self.name} run at step {n}: {e}")
            raise

        return RunRecord(
            times=np.array(self.timegrid.times),
            l2_history=l2,
            h1_history=h1,
            feedback_history=g,
            picard_iters=iters,
            final_state=state,
            label=label or self.name,
            snapshots=snapshots,
        )
