import pytest

from cache import SpectrumStore
from models import PendulumParams


@pytest.fixture
def symmetric():
    """A = 0, moderately deep wells"""
    return PendulumParams(A=0.0, B=100.0)


@pytest.fixture
def deep():
    return PendulumParams(A=5.0, B=1.0e4)


@pytest.fixture
def biased():
    return PendulumParams(A=5.0, B=100.0)


@pytest.fixture
def memory_store():
    return SpectrumStore("sqlite:///:memory:")
