import numpy as np
import pytest

from screenwave import build_mesh, make_screen


@pytest.fixture(scope="session")
def unit_interval():
    return make_screen(2, [(0.0, 1.0)])


@pytest.fixture(scope="session")
def unit_square():
    return make_screen(3, [((0.0, 0.0), (1.0, 1.0))])


@pytest.fixture(scope="session")
def p0_mesh8(unit_interval):
    return build_mesh(unit_interval, 1.0 / 8.0, "P0")


@pytest.fixture(scope="session")
def p1_mesh(unit_interval):
    return build_mesh(unit_interval, 1.0 / 8.0, "P1")


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
