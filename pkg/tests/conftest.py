import numpy as np
import pytest

from regionplan.grid import GridMap


@pytest.fixture
def empty64():
    return GridMap(np.zeros((64, 64), dtype=bool))


@pytest.fixture
def empty16():
    return GridMap(np.zeros((16, 16), dtype=bool))
