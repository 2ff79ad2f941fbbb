import os
import random
import sys

import pytest

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, os.path.join(ROOT, "scripts", "lab"))
sys.path.insert(0, os.path.join(ROOT, "scripts", "experiments"))

from group import get_group  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-size Monte Carlo runs")


@pytest.fixture
def z1():
    return get_group("z1")


@pytest.fixture
def z2():
    return get_group("z2")


@pytest.fixture
def f2():
    return get_group("f2")


@pytest.fixture
def rng():
    return random.Random(20240501)


def random_element(spec, rng, length=4):
    """Product of `length` random generators, in normal form."""
    g = spec.identity
    for _ in range(length):
        g = spec.mul(rng.choice(spec.generators), g)
    return g
