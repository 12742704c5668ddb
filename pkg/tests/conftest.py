import random

import pytest

from jlie.manifest import load_fixture
from jlie.multivec import Multivector
from jlie.scalar import Chart, parse_expr

XYZ = Chart("xyz", ("x", "y", "z"))
XY = Chart("xy", ("x", "y"))


def random_poly(chart: Chart, rng: random.Random, max_degree: int = 2, terms: int = 3):
    """Small random polynomial with integer coefficients in [-3, 3]."""
    f = chart.const(0)
    for _ in range(terms):
        m = chart.const(rng.randint(-3, 3))
        for _ in range(rng.randint(0, max_degree)):
            m = m * chart.coord(rng.choice(chart.coords))
        f = f + m
    return f


def random_multivector(chart: Chart, degree: int, rng: random.Random, max_degree: int = 2) -> Multivector:
    from itertools import combinations

    comps = {}
    for key in combinations(range(chart.dim), degree):
        if rng.random() < 0.7:
            comps[key] = random_poly(chart, rng, max_degree)
    return Multivector(chart, degree, comps)


@pytest.fixture(scope="session")
def heisenberg():
    return load_fixture("heisenberg")


@pytest.fixture(scope="session")
def sl2():
    return load_fixture("sl2")


@pytest.fixture(scope="session")
def riccati_r1():
    return load_fixture("riccati_r1")


@pytest.fixture(scope="session")
def riccati_r4():
    return load_fixture("riccati_r4")


@pytest.fixture(scope="session")
def rectified():
    return load_fixture("rectified")


@pytest.fixture(scope="session")
def J_heis(heisenberg):
    return heisenberg.structure()


@pytest.fixture(scope="session")
def J_sl2(sl2):
    return sl2.structure()


@pytest.fixture(scope="session")
def J_rect(rectified):
    return rectified.structure()


def px(text, chart=XYZ):
    return parse_expr(text, chart)
