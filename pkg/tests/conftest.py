import numpy as np
import pytest

from entdim.measures import (
    BernoulliConvolution,
    Mixture,
    dirac,
    gaussian_grid,
    two_point,
    uniform_grid,
)


@pytest.fixture(scope="session")
def dirac0():
    return dirac(0.0)


@pytest.fixture(scope="session")
def uniform01():
    return uniform_grid(0.0, 1.0)


@pytest.fixture(scope="session")
def cantor4():
    return BernoulliConvolution(0.25)


@pytest.fixture(scope="session")
def cantor3():
    return BernoulliConvolution(1.0 / 3.0)


@pytest.fixture(scope="session")
def gauss_grid():
    return gaussian_grid()


@pytest.fixture(scope="session")
def dirac_uniform_mix(uniform01):
    return Mixture(((0.5, dirac(0.0)), (0.5, uniform01)))


@pytest.fixture(scope="session")
def two_atoms():
    return two_point(0.0, 1.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
