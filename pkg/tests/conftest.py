"""Reusable potential families and points for the test suite."""
import numpy as np
import pytest

from xygibbs import (
    EventuallyConstantPoint,
    Example1Family,
    Interval,
    PolylogFamily,
    SingleCoordinateFamily,
    ZeroFamily,
)

# F(a) = -(a^2 - 1/4)^2, maxima at +-1/2 with F'' = -2
SYMMETRIC_WELL = [-0.0625, 0.0, 0.5, 0.0, -1.0]
# F(a) = -(a + 1/2)^2 (a - 1/2)^2 (2 - a), F''(-1/2) = -5, F''(1/2) = -3
ASYMMETRIC_WELL = [-0.125, 0.0625, 1.0, -0.5, -2.0, 1.0]
GAUSSIAN = [0.0, 0.0, -1.0]
# F(a) = -(a^3 - a/4)^2, maxima at 0 and +-1/2
THREE_PEAKS = [0.0, 0.0, -0.0625, 0.0, 0.5, 0.0, -1.0]


@pytest.fixture
def zero():
    return ZeroFamily()


@pytest.fixture
def example1():
    return Example1Family()


@pytest.fixture
def polylog3():
    return PolylogFamily(3.0)


@pytest.fixture
def gaussian():
    return SingleCoordinateFamily(GAUSSIAN, Interval(-1.0, 1.0))


@pytest.fixture
def symmetric_well():
    return SingleCoordinateFamily(SYMMETRIC_WELL, Interval(-1.0, 1.0))


@pytest.fixture
def asymmetric_well():
    return SingleCoordinateFamily(ASYMMETRIC_WELL, Interval(-1.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_points(family, rng, count, max_prefix=5):
    """Pseudo-random eventually constant points inside the family's domain."""
    lo, hi = family.domain
    points = []
    for _ in range(count):
        depth = int(rng.integers(0, max_prefix + 1))
        prefix = rng.uniform(lo, hi, size=depth).tolist()
        points.append(EventuallyConstantPoint(prefix, float(rng.uniform(lo, hi))))
    return points
