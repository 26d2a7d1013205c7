import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

import oam_bench as ob


@pytest.fixture(scope="session")
def default_grid():
    """512^2 grid, 8-waist window around a 12.5 um waist (the stock setup)."""
    return ob.Grid.for_waist(12.5e-6, 670e-9)


@pytest.fixture(scope="session")
def small_grid():
    return ob.Grid.for_waist(12.5e-6, 670e-9, n=128)


@pytest.fixture(scope="session")
def gauss(default_grid):
    return ob.lg_mode(ob.LGIndex(0, 0), 12.5e-6, default_grid)


@pytest.fixture(scope="session")
def vortex(default_grid):
    return ob.lg_mode(ob.LGIndex(0, 1), 12.5e-6, default_grid)


def rel_err(value, reference):
    return abs(value - reference) / abs(reference)


@pytest.fixture(scope="session")
def waist():
    return 12.5e-6


@pytest.fixture(autouse=True)
def _seed_numpy():
    np.random.seed(0)
