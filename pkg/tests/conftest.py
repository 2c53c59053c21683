import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pcflab.grid import ChartGrid


@pytest.fixture(scope="session")
def grid8():
    return ChartGrid(points_per_axis=8)


@pytest.fixture(scope="session")
def grid16():
    return ChartGrid(points_per_axis=16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
