import gc
import math
import weakref

import mpmath
import numpy as np
import pytest
from scipy.special import zeta

from xygibbs import Example1Family, Interval, PolylogFamily, SingleCoordinateFamily, ZeroFamily
from xygibbs import eval_F, family_from_config, log_partition, variational_residual
from xygibbs.exceptions import ConfigError, DivergenceError


def test_zero_defaults(zero):
    assert zero.domain == Interval(0.0, 1.0)
    assert zero.summed(0.7) == 0.0
    assert np.all(zero.summed_array(np.linspace(0, 1, 5)) == 0.0)


def test_example1_needs_domain_inside_unit_interval():
    with pytest.raises(ConfigError):
        Example1Family(Interval(-1.0, 0.5))


def test_example1_lipschitz_scale():
    assert Example1Family().lipschitz_scale == 4.0
    assert Example1Family(Interval(-0.9, 0.9)).lipschitz_scale is None


def test_example1_derivatives(example1):
    assert example1.d1(0.0) == 0.0
    assert example1.d2(0.0) == -2.0
    h = 1e-5
    numeric = (example1.summed(0.3 + h) - example1.summed(0.3 - h)) / (2 * h)
    assert example1.d1(0.3) == pytest.approx(numeric, abs=1e-8)


def test_polylog_validation():
    with pytest.raises(ConfigError):
        PolylogFamily(1.0)
    with pytest.raises(ConfigError):
        PolylogFamily(3.0, Interval(-1.0, 1.5))


def test_polylog_summed(polylog3):
    assert polylog3.summed(1.0) == pytest.approx(zeta(3), rel=1e-15)
    partial = math.fsum(0.5 ** i / i ** 3 for i in range(1, 200))
    assert eval_F(polylog3, 0.5) == pytest.approx(partial, abs=1e-15)


def test_polylog_tail_partial_sum_range(polylog3):
    partial = math.fsum(0.7 ** i / i ** 3 for i in range(6, 3000))
    assert polylog3.tail(5, 0.7).value == pytest.approx(partial, abs=1e-13)


def test_polylog_tail_series_range(polylog3):
    partial = math.fsum(0.7 ** i / i ** 3 for i in range(81, 3000))
    assert polylog3.tail(80, 0.7).value == pytest.approx(partial, abs=1e-13)


def test_polylog_tail_at_one(polylog3):
    assert polylog3.tail(70, 1.0).value == pytest.approx(zeta(3, 71), rel=1e-12)
    assert polylog3.tail(3, 1.0).value == pytest.approx(zeta(3, 4), rel=1e-12)


def test_polylog_tail_at_minus_one(polylog3):
    i = np.arange(71, 200_001, dtype=float)
    partial = math.fsum(((-1.0) ** i / i ** 3).tolist())
    assert polylog3.tail(70, -1.0).value == pytest.approx(partial, abs=1e-14)


def test_polylog_double_tail(polylog3):
    partial = math.fsum((i - 3) * 0.8 ** i / i ** 3 for i in range(4, 3000))
    assert polylog3.double_tail(2, 0.8).value == pytest.approx(partial, abs=1e-12)


def test_polylog_double_tail_at_one(polylog3):
    expected = zeta(2, 4) - 3 * zeta(3, 4)
    assert polylog3.double_tail(2, 1.0).value == pytest.approx(expected, abs=1e-12)
    expected = zeta(2, 72) - 71 * zeta(3, 72)
    assert polylog3.double_tail(70, 1.0).value == pytest.approx(expected, abs=1e-12)


def test_polylog_double_tail_diverges_for_small_gamma():
    family = PolylogFamily(2.0)
    with pytest.raises(DivergenceError):
        family.double_tail(0, 1.0)
    assert family.double_tail(0, 0.5).value < 0.5


def test_polylog_derivatives(polylog3):
    assert polylog3.d1(0.0) == 1.0
    assert polylog3.d2(0.0) == 0.25
    h = 1e-5
    numeric = (polylog3.summed(0.5 + h) - polylog3.summed(0.5 - h)) / (2 * h)
    assert polylog3.d1(0.5) == pytest.approx(numeric, abs=1e-8)
    assert polylog3.d2(1.0) is None


def test_polylog_not_lipschitz(polylog3):
    assert not polylog3.is_lipschitz
    assert polylog3.lipschitz_bound(4) == pytest.approx(4 ** -2)


def reference_polylog(gamma, z):
    return float(mpmath.re(mpmath.polylog(gamma, z)))


@pytest.mark.parametrize("gamma", [1.5, 2.0, 2.5, 3.0, 4.2, 3.0005])
def test_polylog_summed_array_matches_mpmath(gamma):
    family = PolylogFamily(gamma)
    grid = np.concatenate((np.linspace(-1.0, 1.0, 201), [-0.5000001, -0.4999999, 0.4999999, 0.5000001]))
    expected = np.array([reference_polylog(gamma, z) for z in grid])
    assert family.summed_array(grid) == pytest.approx(expected, rel=1e-12, abs=1e-13)
    assert family.summed(-0.97) == pytest.approx(reference_polylog(gamma, -0.97), rel=1e-12, abs=1e-13)


def test_polylog_summed_array_keeps_shape(polylog3):
    grid = np.linspace(-1.0, 1.0, 12).reshape(3, 4)
    assert polylog3.summed_array(grid).shape == (3, 4)


@pytest.fixture
def polylog_half():
    return PolylogFamily(2.5)


def test_half_integer_polylog_near_minus_one(polylog_half):
    # mpmath answers with a complex number here
    for a in (-1.0, -0.99, -0.96):
        assert eval_F(polylog_half, a) == pytest.approx(reference_polylog(2.5, a), rel=1e-12)


def test_half_integer_polylog_tails(polylog_half):
    i = np.arange(71, 400_001, dtype=float)
    partial = math.fsum(((-1.0) ** i / i ** 2.5).tolist())
    assert polylog_half.tail(70, -1.0).value == pytest.approx(partial, abs=1e-12)
    partial = math.fsum((-0.98) ** i / i ** 2.5 for i in range(6, 5000))
    assert polylog_half.tail(5, -0.98).value == pytest.approx(partial, abs=1e-13)
    assert polylog_half.double_tail(3, -1.0).value == pytest.approx(
        math.fsum((i - 4) * (-1.0) ** i / i ** 2.5 for i in range(5, 400_001)), abs=1e-4)


def test_half_integer_polylog_pressure(polylog_half):
    for beta in (0.5, 1.0, 5.0):
        log_lambda = log_partition(polylog_half, beta).log_value
        assert math.isfinite(log_lambda)
        assert variational_residual(polylog_half, beta) <= 1e-8 * max(1.0, abs(log_lambda))


def test_single_lipschitz_bound(gaussian):
    assert gaussian.lipschitz_bound(1) == 2.0
    assert gaussian.lipschitz_bound(2) == 0.0
    assert gaussian.lipschitz_scale == 4.0


def test_single_interior_lipschitz_bound(symmetric_well):
    # p' = -4a^3 + a is largest in modulus at the ends
    assert symmetric_well.lipschitz_bound(1) == pytest.approx(3.0)


def test_single_family_can_be_collected():
    family = SingleCoordinateFamily([0.0, 0.0, -1.0])
    assert family.lipschitz_bound(1) == 2.0
    ref = weakref.ref(family)
    del family
    gc.collect()
    assert ref() is None


def test_single_validation():
    with pytest.raises(ConfigError):
        SingleCoordinateFamily([])
    with pytest.raises(ConfigError):
        SingleCoordinateFamily([1.0, math.nan])


def test_single_tails(symmetric_well):
    assert symmetric_well.tail(0, 0.5).value == pytest.approx(0.0, abs=1e-15)
    assert symmetric_well.tail(1, 0.2).value == 0.0
    assert symmetric_well.double_tail(3, 0.2).value == 0.0


@pytest.mark.parametrize(
    "config, expected",
    [
        ({"family": "zero"}, ZeroFamily),
        ({"family": "example1", "domain": [-0.25, 0.25]}, Example1Family),
        ({"family": "polylog", "gamma": 4}, PolylogFamily),
        ({"family": "single", "coeffs": [0, 0, -1], "beta": 3}, SingleCoordinateFamily),
    ],
)
def test_family_from_config(config, expected):
    assert isinstance(family_from_config(config), expected)


@pytest.mark.parametrize(
    "config",
    [
        {"family": "potts"},
        {},
        {"family": "example1", "domain": [1]},
        {"family": "example1", "domain": ["a", "b"]},
        {"family": "example1", "domain": [0.5, -0.5]},
        {"family": "polylog", "gamma": 1},
        {"family": "polylog", "gamma": True},
        {"family": "single"},
        {"family": "single", "coeffs": [1, "x"]},
    ],
)
def test_family_from_config_errors(config):
    with pytest.raises(ConfigError):
        family_from_config(config)


def test_family_from_config_not_an_object():
    with pytest.raises(ConfigError):
        family_from_config([1, 2])


def test_describe_rebuilds_family(polylog3, asymmetric_well):
    for family in (polylog3, asymmetric_well):
        rebuilt = family_from_config(family.describe())
        assert rebuilt.domain == family.domain
        assert rebuilt.summed(0.3) == family.summed(0.3)
