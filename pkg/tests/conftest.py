import numpy as np
import pytest

from depthlab import make_measure


@pytest.fixture
def square():
    return make_measure([[1, 0], [-1, 0], [0, 1], [0, -1]])


@pytest.fixture
def triangle():
    s = np.sqrt(3) / 2
    return make_measure([[0, 1], [-s, -0.5], [s, -0.5]])
