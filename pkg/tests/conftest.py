import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dynamics.state import State  # noqa: E402
from fields.generators import Envelope, random_symmetric_field  # noqa: E402
from spectral.core import Grid, ParityClass, ScalarField  # noqa: E402
from utils.console import set_quiet  # noqa: E402

set_quiet(True)


@pytest.fixture(scope="session")
def grid():
    return Grid(n=64)


@pytest.fixture(scope="session")
def fine_grid():
    return Grid(n=128)


@pytest.fixture(scope="session")
def envelope():
    return Envelope(width=0.35, max_mode=1)


@pytest.fixture(scope="session")
def velocity(grid, envelope):
    return random_symmetric_field(1, envelope, ParityClass.VELOCITY_LIKE, 1e-2, grid)


@pytest.fixture(scope="session")
def magnetic(grid, envelope):
    return random_symmetric_field(2, envelope, ParityClass.MAGNETIC_LIKE, 1e-2, grid)


@pytest.fixture(scope="session")
def state(velocity, magnetic):
    return State(velocity, magnetic, 0.0)


def gaussian(grid, width=0.3, center=(0.0, 0.0)):
    r2 = (grid.x1 - center[0]) ** 2 + (grid.x2 - center[1]) ** 2
    return ScalarField.from_values(np.exp(-0.5 * r2 / width**2), grid)
