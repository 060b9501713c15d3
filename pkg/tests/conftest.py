import numpy as np
import pytest
from scipy.linalg import qr

from qwalk import decompose
from qwalk.fixtures import FIXTURES, shift_coin_walk


def random_walk(seed, n_max=5, shift_max=3):
    """Seeded shift-block x coin walk used by all property suites."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max))
    shifts = rng.integers(-shift_max, shift_max + 1, n)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = qr(z)
    coin = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return shift_coin_walk(tuple(int(s) for s in shifts), coin)


@pytest.fixture(scope="session")
def grover3_dec():
    return decompose(FIXTURES["grover3"]())


@pytest.fixture(scope="session")
def grover4_dec():
    return decompose(FIXTURES["grover4"]())


@pytest.fixture(scope="session")
def coined_dec():
    return decompose(FIXTURES["coined"](0.5))
