from pathlib import Path

import numpy as np
import pytest

from cgl_control.models.params import Grid, PhysParams, TimeGrid

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def exp1_params() -> PhysParams:
    """Linear plant with two unstable modes."""
    return PhysParams(nu=1.0, alpha=3.0, gamma=23.0, mu=60.0, n_modes=2)


@pytest.fixture
def exp2_params() -> PhysParams:
    """Cubic plant with one unstable mode."""
    return PhysParams(nu=1.0, alpha=1.0, gamma=10.0, kappa=1.0, beta=4.0, p=2.0, mu=12.0, n_modes=1)


@pytest.fixture
def heat_params() -> PhysParams:
    return PhysParams(nu=1.0)


@pytest.fixture
def grid() -> Grid:
    return Grid(n_x=101)


@pytest.fixture
def fine_grid() -> Grid:
    return Grid(n_x=201)


@pytest.fixture
def short_time() -> TimeGrid:
    return TimeGrid(n_t=201, t_max=0.1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def config_dir() -> Path:
    return CONFIG_DIR
