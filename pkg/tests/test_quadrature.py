import math
from unittest import mock

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import erf

from xygibbs import Interval, SingleCoordinateFamily, Settings
from xygibbs.exceptions import (
    AccuracyError,
    ConfigError,
    DomainError,
    EndpointPeakError,
    NonConcavePeakError,
    UnsupportedMultiplicityError,
)
from xygibbs.quadrature import (
    family_peaks,
    golden_max,
    integrate,
    laplace_approx,
    laplace_log_partition,
    locate_peaks,
    log_integral_exp,
    log_partition,
    matching_tolerance,
    maximizing_peaks,
)

from .conftest import GAUSSIAN, THREE_PEAKS


def test_integrate_polynomials():
    unit = Interval(0.0, 1.0)
    assert integrate(lambda t: np.ones_like(t), unit).value == pytest.approx(1.0, abs=1e-15)
    assert integrate(lambda t: t, unit).value == pytest.approx(0.5, abs=1e-15)


def test_integrate_gaussian():
    result = integrate(lambda t: np.exp(-t * t), Interval(-1.0, 1.0), tol=1e-13)
    assert result.value == pytest.approx(math.sqrt(math.pi) * erf(1.0), abs=1e-13)
    assert result.abs_error_estimate <= 1e-13
    assert result.evaluations >= 21 * 8


def test_integrate_scalar_integrand():
    result = integrate(math.cos, Interval(0.0, math.pi / 2), vectorized=False)
    assert result.value == pytest.approx(1.0, abs=1e-12)


def test_integrate_breakpoints_are_panel_edges():
    result = integrate(np.abs, Interval(-1.0, 2.0), breakpoints=[0.0])
    assert result.value == pytest.approx(2.5, abs=1e-13)


def test_integrate_subdivision_limit():
    with pytest.raises(AccuracyError) as exc:
        integrate(lambda t: np.sqrt(np.abs(t)), Interval(-1.0, 1.0), tol=1e-14, max_panels=9)
    assert exc.value.panels == 9
    assert exc.value.best_estimate == pytest.approx(4 / 3, abs=1e-3)


def test_integrate_non_finite():
    with pytest.raises(DomainError):
        integrate(lambda t: np.full_like(t, np.nan), Interval(0.0, 1.0))


def test_integrate_needs_a_tolerance():
    with pytest.raises(ConfigError):
        integrate(np.cos, Interval(0.0, 1.0), tol=0.0, rel_tol=0.0)


def test_golden_max():
    x, value = golden_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert value == pytest.approx(0.0, abs=1e-12)


def test_golden_max_returns_end():
    x, value = golden_max(lambda t: t, 0.0, 1.0)
    assert x == 1.0
    assert value == 1.0


def test_locate_peaks_symmetric_well(symmetric_well):
    peaks = family_peaks(symmetric_well)
    m_f, maximizing = maximizing_peaks(peaks)
    assert m_f == pytest.approx(0.0, abs=1e-14)
    assert [p.location for p in maximizing] == pytest.approx([-0.5, 0.5], abs=1e-7)
    assert all(p.interior for p in maximizing)


def test_locate_peaks_flat(zero):
    (peak,) = family_peaks(zero)
    assert peak.flat
    assert not peak.interior


def test_locate_peaks_snaps_to_end(polylog3):
    peaks = family_peaks(polylog3)
    assert peaks[-1].location == 1.0
    assert not peaks[-1].interior


def test_locate_peaks_non_finite():
    with pytest.raises(DomainError):
        locate_peaks(lambda t: np.where(t > 0.5, np.inf, t), Interval(0.0, 1.0))


def test_locate_peaks_takes_derivative_root():
    interval = Interval(0.0, 1.0)
    with mock.patch("xygibbs.quadrature.brentq", wraps=brentq) as root:
        (peak,) = locate_peaks(lambda t: -(t - 0.3) ** 2, interval, 65, 1e-12, derivative=lambda t: -2 * (t - 0.3))
    root.assert_called_once()
    assert peak.location == pytest.approx(0.3, abs=1e-12)
    assert peak.interior


def test_locate_peaks_without_derivative_sign_change():
    interval = Interval(0.0, 1.0)
    with mock.patch("xygibbs.quadrature.brentq") as root:
        (peak,) = locate_peaks(lambda t: -(t - 0.3) ** 2, interval, 65, 1e-12, derivative=lambda t: None)
    root.assert_not_called()
    assert peak.location == pytest.approx(0.3, abs=1e-6)


def test_matching_tolerance():
    assert matching_tolerance(0.0) == 1e-9
    assert matching_tolerance(-100.0) == pytest.approx(1e-7)


def test_log_partition_zero(zero):
    for beta in (0.0, 1.0, 7.0):
        assert log_partition(zero, beta).log_value == pytest.approx(0.0, abs=1e-14)


def test_log_partition_at_zero_temperature_is_log_width(example1, polylog3):
    assert log_partition(example1, 0.0).log_value == pytest.approx(0.0, abs=1e-14)
    assert log_partition(polylog3, 0.0).log_value == pytest.approx(math.log(2.0), abs=1e-14)


def test_log_partition_example1_large_beta(example1):
    beta = 1e4
    expected = 0.5 * math.log(math.pi / beta)
    assert log_partition(example1, beta).log_value == pytest.approx(expected, abs=1e-3)


def test_log_partition_gaussian(gaussian):
    expected = math.log(math.sqrt(math.pi / 100) * erf(10.0))
    assert log_partition(gaussian, 100.0).log_value == pytest.approx(expected, abs=1e-10)


def test_log_partition_does_not_underflow(example1):
    result = log_partition(example1, 1e6)
    assert math.isfinite(result.log_value)
    assert result.log_value == pytest.approx(0.5 * math.log(math.pi / 1e6), abs=1e-5)


def test_log_partition_shift_invariance(gaussian):
    shifted = SingleCoordinateFamily([3.0] + GAUSSIAN[1:], gaussian.domain)
    for beta in (1.0, 10.0):
        difference = log_partition(shifted, beta).log_value - log_partition(gaussian, beta).log_value
        assert difference == pytest.approx(3.0 * beta, abs=1e-10)


def test_log_partition_convex(example1):
    betas = np.arange(0.0, 11.0)
    values = np.array([log_partition(example1, float(b)).log_value for b in betas])
    assert np.all(np.diff(values, 2) >= -1e-8)


def test_log_integral_exp_outside_domain(example1):
    with pytest.raises(DomainError):
        log_integral_exp(example1, Interval(0.0, 0.7), 1.0)


def test_log_integral_exp_negative_beta(example1):
    with pytest.raises(ConfigError):
        log_integral_exp(example1, example1.domain, -1.0)


def test_log_partition_respects_settings(gaussian):
    coarse = Settings(quad_tol=1e-6, threads=1)
    assert log_partition(gaussian, 10.0, coarse).log_value == pytest.approx(
        log_partition(gaussian, 10.0).log_value, abs=1e-5)


def test_laplace_approx():
    assert laplace_approx(0.0, -2.0, math.pi / 2) == pytest.approx(0.5 * math.log(2.0))
    assert laplace_approx(0.0, -2.0, 100.0) == pytest.approx(0.5 * math.log(math.pi / 100))
    assert laplace_approx(1.0, -2.0, 100.0) == pytest.approx(100.0 + 0.5 * math.log(math.pi / 100))


def test_laplace_approx_needs_concave_peak():
    with pytest.raises(NonConcavePeakError):
        laplace_approx(0.0, 0.0, 1.0)
    with pytest.raises(NonConcavePeakError):
        laplace_approx(0.0, 1.0, 1.0)


def test_laplace_approx_needs_positive_beta():
    with pytest.raises(ConfigError):
        laplace_approx(0.0, -2.0, 0.0)


def test_laplace_agrees_with_gaussian(gaussian):
    for beta in (100.0, 1000.0, 1e4):
        ratio = math.exp(log_partition(gaussian, beta).log_value - laplace_log_partition(gaussian, beta))
        assert abs(ratio - 1) <= 1e-9


def test_laplace_error_decays_like_one_over_beta(example1):
    errors = []
    for beta in (1e2, 1e3, 1e4):
        ratio = math.exp(log_partition(example1, beta).log_value - laplace_log_partition(example1, beta))
        errors.append(abs(ratio - 1))
    # the first correction is -3 / (4 beta)
    assert errors[0] == pytest.approx(0.0075, rel=0.05)
    for coarse, fine in zip(errors, errors[1:]):
        assert 0.05 <= fine / coarse <= 0.2


def test_laplace_two_peaks(symmetric_well):
    beta = 1e4
    expected = math.log(2.0) + 0.5 * math.log(math.pi / beta)
    assert laplace_log_partition(symmetric_well, beta) == pytest.approx(expected, abs=1e-6)
    ratio = math.exp(log_partition(symmetric_well, beta).log_value - expected)
    assert abs(ratio - 1) < 1e-2


def test_laplace_rejects_endpoint(polylog3):
    with pytest.raises(EndpointPeakError) as exc:
        laplace_log_partition(polylog3, 10.0)
    assert exc.value.location == 1.0


def test_laplace_rejects_flat(zero):
    with pytest.raises(UnsupportedMultiplicityError) as exc:
        laplace_log_partition(zero, 10.0)
    assert exc.value.count is None


def test_laplace_rejects_three_peaks():
    family = SingleCoordinateFamily(THREE_PEAKS)
    with pytest.raises(UnsupportedMultiplicityError) as exc:
        laplace_log_partition(family, 10.0)
    assert exc.value.count == 3
