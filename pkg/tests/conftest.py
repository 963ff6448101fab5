import numpy as np
import pytest

from projmod.algebra import BackendConfig
from projmod.generators import gen_bott
from projmod.module import ProjectiveModule


@pytest.fixture(scope="session")
def bott():
    return gen_bott(1, 8)


@pytest.fixture(scope="session")
def bott_module(bott):
    return ProjectiveModule(bott)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def torus1():
    return BackendConfig("torus", 1, degree=8)


@pytest.fixture(scope="session")
def torus2():
    return BackendConfig("torus", 2, degree=8)


@pytest.fixture(scope="session")
def nctorus():
    return BackendConfig("nctorus", 2, theta=0.6180339887, degree=6)


@pytest.fixture(scope="session")
def mat3():
    return BackendConfig("matrix", 3, tol=1e-10)
