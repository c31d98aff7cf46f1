import numpy as np
import pytest

from grenlab.densities import DensityFamily, make_density


@pytest.fixture(scope="session")
def linear_density():
    return make_density(DensityFamily.linear(1.5, 0.5))


@pytest.fixture(scope="session")
def texp_density():
    return make_density(DensityFamily.truncexp(1.0))


@pytest.fixture(scope="session", params=["linear", "texp"])
def any_density(request, linear_density, texp_density):
    return linear_density if request.param == "linear" else texp_density


@pytest.fixture()
def rng():
    return np.random.default_rng(20050)
