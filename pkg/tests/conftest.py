import numpy as np
import pytest

from hyplab.spaces import make_hyperbolic, make_product
from hyplab.spherical import get_transform
from hyplab.wave import wave_transform


@pytest.fixture(scope="session")
def h3():
    return make_hyperbolic(3)


@pytest.fixture(scope="session")
def h4():
    return make_hyperbolic(4)


@pytest.fixture(scope="session")
def p33():
    return make_product([3, 3])


@pytest.fixture(scope="session")
def tr_h3(h3):
    return get_transform(h3)


@pytest.fixture(scope="session")
def tr_h3_small(h3):
    # lighter grid for optimizer-heavy tests
    return get_transform(h3, n=1024, m=1024, lam_max=48.0)


@pytest.fixture(scope="session")
def tr_p33(p33):
    return get_transform(p33)


@pytest.fixture(scope="session")
def tr_wave(h3):
    return wave_transform(h3)
