import math

import numpy as np
import pytest

from idealflow.complex import load_fixture

FIXTURES = ("torus1", "torus2", "genus2")


@pytest.fixture(params=FIXTURES)
def any_fixture(request):
    cx, theta = load_fixture(request.param)
    return request.param, cx, theta


@pytest.fixture
def torus1():
    return load_fixture("torus1")


@pytest.fixture
def torus2():
    return load_fixture("torus2")


@pytest.fixture
def genus2():
    return load_fixture("genus2")


def genus2_angles(spoke):
    """Angles on the genus-2 fixture with every spoke at ``spoke`` and (C1) enforced."""
    return np.array([math.pi - 2 * spoke] * 4 + [spoke] * 8)


def random_radii(rng, n, lo=0.1, hi=10.0):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


def fd_jacobian(fun, u, h=1e-5):
    """Central finite differences, column j = d fun / d u_j."""
    u = np.asarray(u, dtype=float)
    cols = []
    for j in range(u.size):
        e = np.zeros_like(u)
        e[j] = h
        cols.append((fun(u + e) - fun(u - e)) / (2 * h))
    return np.array(cols).T
