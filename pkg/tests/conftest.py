import numpy as np
import pytest

from toeplitz.symbol import DecayLaw, LaurentSymbol
from toeplitz.utils import setup_logging


@pytest.fixture(autouse=True, scope="session")
def quiet_logging():
    setup_logging(level="WARNING", to_file=False)


@pytest.fixture
def hatano_nelson():
    """a_1 = 1/2 below the diagonal, a_-1 = 2 above."""
    return LaurentSymbol.from_coeffs({1: 0.5, -1: 2.0})


@pytest.fixture
def tridiagonal():
    """Hermitian a_0 = 4, a_1 = a_-1 = 1."""
    return LaurentSymbol.tridiagonal(1.0, 4.0, 1.0)


@pytest.fixture
def algebraic_law():
    return DecayLaw(p=1.8, q=1.8, c_plus=0.6, c_minus=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
