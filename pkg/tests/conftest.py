import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hsad.hsi import Hsi


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_cube(rng):
    return Hsi(rng.uniform(0.0, 1.0, size=(16, 16, 8)))
