import math
import os
import sys

import numpy as np
import pytest

# make `app` importable when pytest is started from the repository root
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from app.models.pointprocess import PointConfiguration  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def triangle():
    """Equilateral triangle of side 0.5: a VR 2-face at r = 0.5 but not a Čech one."""
    height = 0.5 * math.sqrt(3) / 2
    return PointConfiguration.from_points([[0.2, 0.2], [0.7, 0.2], [0.45, 0.2 + height]])


@pytest.fixture
def random_configurations():
    """Factory of small uniform configurations with a fixed point count."""

    def make(count: int, n: int, d: int, seed: int = 7):
        gen = np.random.default_rng(seed)
        return [PointConfiguration.from_points(gen.random((n, d)), dim=d, trial_index=i) for i in range(count)]

    return make
