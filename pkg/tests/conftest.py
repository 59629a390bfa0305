import os
import sys

import numpy as np
import pytest

SRC = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")
if SRC not in sys.path:
    sys.path.insert(0, SRC)

from core.Dag import Dag  # noqa: E402
from core.Dataset import Dataset  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow Monte-Carlo tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cosine_pair():
    """X1 ~ N(0,1), X2 = -3cos(X1) + N(0,1), N = 500, centered"""
    gen = np.random.default_rng(11)
    x1 = gen.standard_normal(500)
    x2 = -3.0 * np.cos(x1) + gen.standard_normal(500)
    return Dataset(np.column_stack([x1, x2])).prepare()


@pytest.fixture
def chain3():
    """x1 -> x2 -> x3 with strong nonlinear links, N = 200, centered"""
    gen = np.random.default_rng(5)
    x1 = gen.standard_normal(200)
    x2 = np.sin(2 * x1) * 2 + 0.3 * gen.standard_normal(200)
    x3 = x2 ** 2 + 0.3 * gen.standard_normal(200)
    return Dataset(np.column_stack([x1, x2, x3])).prepare(), Dag(3, [(0, 1), (1, 2)])
