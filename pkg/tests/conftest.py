import numpy as np
import pytest

import errwlab as el


@pytest.fixture
def triangle():
    return el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))


@pytest.fixture
def path3():
    return el.path_graph(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
