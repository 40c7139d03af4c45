import numpy as np
import pytest

from voltlab.fnspace import Grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid256():
    return Grid(256)
