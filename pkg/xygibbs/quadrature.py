"""
This module contains one-dimensional quadrature of peaked integrands.

Integrals of ``exp(beta F)`` are carried in log scale: the maximum ``M`` of
``F`` over the interval is located first (grid scan plus golden-section
refinement), panels are pre-split at every located peak, and only the shifted
integrand ``exp(beta (F - M))`` is handed to the adaptive rule.
"""

import heapq
import logging
import math
from typing import Callable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from xygibbs.exceptions import (
    AccuracyError,
    ConfigError,
    DomainError,
    EndpointPeakError,
    NonConcavePeakError,
    UnsupportedMultiplicityError,
)
from xygibbs.helpers import cache
from xygibbs.potential import Interval, PotentialFamily, second_derivative
from xygibbs.settings import DEFAULT, Settings

logger = logging.getLogger(__name__)

PHI_RATIO = 2 / (1 + math.sqrt(5))
INITIAL_PANELS = 8
# coarse grid used to shift integrands that are not exp(beta F)
SHIFT_GRID = 65

# Gauss 10-point / Kronrod 21-point nodes and weights on [-1, 1]
X1 = np.array([
    0.973906528517171720077964012084452,
    0.865063366688984510732096688423493,
    0.679409568299024406234327365114874,
    0.433395394129247190799265943165784,
    0.148874338981631210884826001129720,
])
W10 = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])
X2 = np.array([
    0.995657163025808080735527280689003,
    0.930157491355708226001207180059508,
    0.780817726586416897063717578345042,
    0.562757134668604683339000099272694,
    0.294392862701460198131126603103866,
])
W21A = np.array([
    0.032558162307964727478818972459390,
    0.075039674810919952767043140916190,
    0.109387158802297641899210590325805,
    0.134709217311473325928054001771707,
    0.147739104901338491374841515972068,
])
W21B = np.array([
    0.011694638867371874278064396062192,
    0.054755896574351996031381300244580,
    0.093125454583697605535065465083366,
    0.123491976262065851077958109831074,
    0.142775938577060080797094273138717,
    0.149445554002916905664936468389821,
])
NODES = np.concatenate((X1, -X1, X2, -X2, [0.0]))


class QuadratureResult(NamedTuple):
    value: float
    abs_error_estimate: float
    evaluations: int
    panels: int = 1


class PeakedIntegralResult(NamedTuple):
    """``log_value = beta * shift + log(raw.value)``."""
    log_value: float
    shift: float
    raw: QuadratureResult


class LocatedPeak(NamedTuple):
    """A local maximum of ``F``; ``flat`` marks a plateau of equal grid values."""
    location: float
    value: float
    interior: bool
    flat: bool = False


def _evaluate(fn: Callable, points: np.ndarray, vectorized: bool) -> np.ndarray:
    if vectorized:
        values = np.asarray(fn(points), dtype=float)
    else:
        values = np.fromiter((fn(float(t)) for t in points), dtype=float, count=points.size)
    return np.broadcast_to(values, points.shape)


def _kronrod(fn: Callable, a: float, b: float, vectorized: bool) -> Tuple[float, float]:
    """Apply the nested 10/21 rule on ``[a, b]``; the error is ``|K21 - G10|``."""
    half_length = 0.5 * (b - a)
    center = 0.5 * (a + b)
    nodes = center + half_length * NODES
    values = _evaluate(fn, nodes, vectorized)
    if not np.all(np.isfinite(values)):
        bad = float(nodes[~np.isfinite(values)][0])
        raise DomainError(bad, a, b, f'integrand is not finite at {bad!r}')

    f1 = values[0:5] + values[5:10]
    f2 = values[10:15] + values[15:20]
    res10 = np.dot(W10, f1)
    res21 = np.dot(W21A, f1) + np.dot(W21B[:5], f2) + W21B[5] * values[20]
    return float(res21 * half_length), float(abs(res21 - res10) * half_length)


def integrate(
    fn: Callable,
    interval: Interval,
    tol: float = 1e-10,
    rel_tol: float = 0.0,
    breakpoints: Iterable[float] = (),
    vectorized: bool = True,
    max_panels: int = DEFAULT.max_panels,
) -> QuadratureResult:
    """Integrate ``fn`` over ``interval`` by adaptive bisection.

    The panel with the largest error estimate is bisected until the summed
    estimate is at most ``max(tol, rel_tol * |value|)``. The final value is
    summed over panels sorted by their left end, so the result does not
    depend on the order in which panels were refined.

    :param fn:
        The integrand; takes an array of points when ``vectorized``.
    :param Interval interval:
        Integration range.
    :param float tol:
        Absolute tolerance.
    :param float rel_tol:
        (Optional) Relative tolerance.
    :param breakpoints:
        (Optional) Points at which the initial panels are split.
    :param bool vectorized:
        Whether ``fn`` accepts numpy arrays.
    :param int max_panels:
        Subdivision limit.
    :rtype: QuadratureResult
    """
    if not tol > 0 and not rel_tol > 0:
        raise ConfigError(f'quadrature tolerance must be positive, got tol={tol!r} rel_tol={rel_tol!r}')

    lo, hi = interval.lo, interval.hi
    edges = set(np.linspace(lo, hi, INITIAL_PANELS + 1).tolist())
    edges.update(float(b) for b in breakpoints if lo < b < hi)
    edges = sorted(edges)
    min_width = 1e-14 * max(interval.width, abs(lo), abs(hi))

    heap = []
    final = []
    total = 0.0
    error = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        value, err = _kronrod(fn, a, b, vectorized)
        heapq.heappush(heap, (-err, a, b, value))
        total += value
        error += err
    evaluations = 21 * len(heap)

    while heap and error > max(tol, rel_tol * abs(total)):
        if len(heap) + len(final) >= max_panels:
            raise AccuracyError(total, error, len(heap) + len(final))
        neg_err, a, b, value = heapq.heappop(heap)
        if b - a <= min_width:
            final.append((a, b, value, -neg_err))
            continue
        mid = 0.5 * (a + b)
        left, left_err = _kronrod(fn, a, mid, vectorized)
        right, right_err = _kronrod(fn, mid, b, vectorized)
        evaluations += 42
        heapq.heappush(heap, (-left_err, a, mid, left))
        heapq.heappush(heap, (-right_err, mid, b, right))
        total += left + right - value
        error += left_err + right_err + neg_err

    panels = sorted([(a, b, value, -neg_err) for neg_err, a, b, value in heap] + final)
    total = math.fsum(p[2] for p in panels)
    error = math.fsum(p[3] for p in panels)
    logger.debug(f'quadrature on {interval!r}: {len(panels)} panels, error {error!r}')
    return QuadratureResult(total, error, evaluations, len(panels))


def golden_max(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12, max_iterations: int = 200):
    """Maximise a unimodal ``fn`` on ``[lo, hi]`` by golden-section search.

    The ends are compared with the final estimate, so a maximum sitting on an
    end of the bracket is returned exactly.

    :returns: ``(argmax, max)``
    """
    x_lo, x_hi = lo, hi
    x1 = x_hi - PHI_RATIO * (x_hi - x_lo)
    x2 = x_lo + PHI_RATIO * (x_hi - x_lo)
    f1 = fn(x1)
    f2 = fn(x2)
    iteration = 0
    while iteration < max_iterations and x_hi - x_lo > tol:
        if f2 < f1:
            x_hi = x2
            x2, f2 = x1, f1
            x1 = x_hi - PHI_RATIO * (x_hi - x_lo)
            f1 = fn(x1)
        else:
            x_lo = x1
            x1, f1 = x2, f2
            x2 = x_lo + PHI_RATIO * (x_hi - x_lo)
            f2 = fn(x2)
        iteration += 1

    best = (f1, x1) if f1 >= f2 else (f2, x2)
    for end in (lo, hi):
        f_end = fn(end)
        if f_end > best[0]:
            best = (f_end, end)
    return best[1], best[0]


def _refine(scalar, derivative, lo: float, hi: float, tol: float) -> Tuple[float, float]:
    """Refine a bracketed maximum.

    When ``derivative`` falls from positive to negative across the bracket its
    root is taken, which depends on ``F`` only through ``F'``; otherwise
    golden section is used.
    """
    if derivative is not None:
        d_lo, d_hi = derivative(lo), derivative(hi)
        if d_lo is not None and d_hi is not None and d_lo > 0 > d_hi:
            location = brentq(derivative, lo, hi, xtol=tol)
            return location, scalar(location)
    return golden_max(scalar, lo, hi, tol)


def locate_peaks(
    fn: Callable,
    interval: Interval,
    grid_points: int = DEFAULT.grid_points,
    tol: float = DEFAULT.peak_tol,
    scalar: Optional[Callable[[float], float]] = None,
    derivative: Optional[Callable[[float], Optional[float]]] = None,
) -> Tuple[LocatedPeak, ...]:
    """Find the local maxima of ``fn`` on ``interval``.

    A uniform grid is scanned; runs of equal grid values are treated as one
    candidate, and runs longer than two points are reported as flat. Every
    other candidate is refined inside its neighbouring grid cells, by a root
    of ``derivative`` when one is bracketed and by golden section otherwise.
    Peaks within ``1e-9 (hi - lo)`` of an end are snapped onto it and marked
    as not interior.

    :param fn:
        Vectorised function.
    :param Interval interval:
        Search range.
    :param int grid_points:
        Size of the scanning grid.
    :param float tol:
        Golden-section bracket width.
    :param scalar:
        (Optional) Scalar version of ``fn`` used by the refinement.
    :param derivative:
        (Optional) Analytic derivative of ``fn``; may return ``None``.
    :rtype: tuple
    """
    xs = interval.grid(grid_points)
    ys = np.asarray(fn(xs), dtype=float)
    if not np.all(np.isfinite(ys)):
        bad = float(xs[~np.isfinite(ys)][0])
        raise DomainError(bad, interval.lo, interval.hi, f'F is not finite at grid point {bad!r}')
    scalar = scalar or (lambda t: float(fn(np.array([t]))[0]))

    # runs of equal consecutive values
    breaks = np.flatnonzero(np.diff(ys) != 0) + 1
    starts = np.concatenate(([0], breaks))
    ends = np.concatenate((breaks - 1, [len(ys) - 1]))

    snap = 1e-9 * interval.width
    peaks = []
    for s, e in zip(starts, ends):
        value = ys[s]
        if s > 0 and ys[s - 1] >= value:
            continue
        if e < len(ys) - 1 and ys[e + 1] >= value:
            continue
        if e - s + 1 > 2:
            location = 0.5 * (xs[s] + xs[e])
            interior = s > 0 and e < len(ys) - 1
            peaks.append(LocatedPeak(float(location), float(value), interior, flat=True))
            continue
        left = xs[max(s - 1, 0)]
        right = xs[min(e + 1, len(xs) - 1)]
        location, value = _refine(scalar, derivative, float(left), float(right), tol)
        interior = True
        if location - interval.lo <= snap:
            location, interior = interval.lo, False
            value = scalar(location)
        elif interval.hi - location <= snap:
            location, interior = interval.hi, False
            value = scalar(location)
        peaks.append(LocatedPeak(float(location), float(value), interior))

    peaks.sort(key=lambda p: p.location)
    logger.debug(f'located {len(peaks)} local maxima on {interval!r}')
    return tuple(peaks)


@cache
def family_peaks(family: PotentialFamily, settings: Settings = DEFAULT) -> Tuple[LocatedPeak, ...]:
    """Local maxima of ``F`` over the whole domain."""
    return locate_peaks(
        family.summed_array, family.domain, settings.grid_points, settings.peak_tol, family.summed, family.d1)


def matching_tolerance(m_f: float) -> float:
    return 1e-9 * max(1.0, abs(m_f))


def maximizing_peaks(peaks: Sequence[LocatedPeak]) -> Tuple[float, List[LocatedPeak]]:
    """The maximum value and the peaks attaining it within the matching tolerance."""
    m_f = max(p.value for p in peaks)
    threshold = m_f - matching_tolerance(m_f)
    return m_f, [p for p in peaks if p.value >= threshold]


def log_integral_exp(
    family: PotentialFamily,
    interval: Interval,
    beta: float,
    settings: Settings = DEFAULT,
) -> PeakedIntegralResult:
    """``log int_interval exp(beta F)`` with the maximum of ``F`` factored out.

    :param PotentialFamily family:
        The potential.
    :param Interval interval:
        A subinterval of the domain.
    :param float beta:
        Inverse temperature, ``beta >= 0``.
    :rtype: PeakedIntegralResult
    """
    if not beta >= 0:
        raise ConfigError(f'beta must be nonnegative, got {beta!r}')
    if not interval.within(family.domain):
        raise DomainError(interval.lo, family.domain.lo, family.domain.hi,
                          f'{interval!r} is not inside the domain {family.domain!r}')
    if interval == family.domain:
        peaks = family_peaks(family, settings)
    else:
        peaks = locate_peaks(
            family.summed_array, interval, settings.box_grid_points, settings.peak_tol, family.summed, family.d1)
    shift = max(p.value for p in peaks)

    def shifted(t):
        return np.exp(beta * (family.summed_array(t) - shift))

    raw = integrate(
        shifted, interval,
        tol=1e-300, rel_tol=settings.quad_tol,
        breakpoints=[p.location for p in peaks],
        max_panels=settings.max_panels,
    )
    return PeakedIntegralResult(beta * shift + math.log(raw.value), shift, raw)


@cache
def log_partition(family: PotentialFamily, beta: float, settings: Settings = DEFAULT) -> PeakedIntegralResult:
    """``log lambda_beta = log int exp(beta F)`` over the domain.

    :param PotentialFamily family:
        The potential.
    :param float beta:
        Inverse temperature, ``beta >= 0``.
    :param Settings settings:
        (Optional) Tolerances and grid sizes.
    :rtype: PeakedIntegralResult
    """
    result = log_integral_exp(family, family.domain, float(beta), settings)
    logger.debug(f'log lambda at beta={beta!r}: {result.log_value!r}')
    return result


def laplace_approx(F_at_peak: float, F2_at_peak: float, beta: float) -> float:
    """Log of the leading Laplace term ``exp(beta F) sqrt(-2 pi / (beta F''))``.

    :param float F_at_peak:
        ``F`` at an interior maximum.
    :param float F2_at_peak:
        ``F''`` there; must be negative.
    :param float beta:
        Inverse temperature, ``beta > 0``.
    :rtype: float
    """
    if not F2_at_peak < 0:
        raise NonConcavePeakError(None, F2_at_peak)
    if not beta > 0:
        raise ConfigError(f'the Laplace term needs beta > 0, got {beta!r}')
    return beta * F_at_peak + 0.5 * math.log(-2 * math.pi / (beta * F2_at_peak))


def laplace_log_partition(family: PotentialFamily, beta: float, settings: Settings = DEFAULT) -> float:
    """Leading Laplace approximation of ``log lambda_beta``.

    The contributions of all maximising peaks (one or two, all interior) are
    added.

    :rtype: float
    """
    peaks = family_peaks(family, settings)
    m_f, maximizing = maximizing_peaks(peaks)
    if any(p.flat for p in maximizing):
        raise UnsupportedMultiplicityError(None)
    if len(maximizing) > 2:
        raise UnsupportedMultiplicityError(len(maximizing))
    terms = []
    for peak in maximizing:
        if not peak.interior:
            raise EndpointPeakError(peak.location)
        curvature = second_derivative(family, peak.location).value
        try:
            terms.append(laplace_approx(peak.value, curvature, beta))
        except NonConcavePeakError:
            raise NonConcavePeakError(peak.location, curvature)
    return float(logsumexp(terms))
