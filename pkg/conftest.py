# Shared fixtures for the convexity testing suite
import pytest

from convexity_testing.core import GridFunction, Rng
from convexity_testing.hard_instances import appendix_counterexample


@pytest.fixture
def rng():
    return Rng(20240611)


@pytest.fixture
def appendix():
    return appendix_counterexample()


@pytest.fixture
def parabola_line():
    """x^2 on [10]"""
    return GridFunction.line([x * x for x in range(10)])


@pytest.fixture
def corrupted_line():
    """x^2 on [16] with a bump at 7"""
    values = [x * x for x in range(16)]
    values[7] += 40
    return GridFunction.line(values)
