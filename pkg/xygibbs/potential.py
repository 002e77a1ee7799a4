"""
This module contains product-type potentials and the points they are evaluated at.

A product-type potential on the sequence space ``[lo, hi]^N`` is
``f(x) = sum_j f_j(x_j)``. Everything the library computes reduces to four
one-dimensional evaluators of a :class:`PotentialFamily`: the factors ``f_i``,
the summed potential ``F(a) = f(a, a, a, ...)``, the tails
``T_j(a) = sum_{i>j} f_i(a)`` and the double tails ``sum_{j>m} T_j(c)``.
Points of the sequence space are represented by
:class:`EventuallyConstantPoint`, a finite prefix followed by a constant tail,
for which all of these infinite sums are finite algebra.
"""

import logging
import math
import sys
from typing import Iterable, NamedTuple, Optional, Tuple

import numpy as np

from xygibbs.exceptions import ConfigError, DivergenceError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
CHECK_HORIZON = 64
MAX_TERMS = 200_000
EPS = sys.float_info.epsilon


class Estimate(NamedTuple):
    """A value together with a bound on its absolute error."""
    value: float
    error: float


class Interval:
    """A closed interval ``[lo, hi]`` with ``lo < hi``."""

    def __init__(self, lo: float, hi: float):
        """Construct an :class:`Interval <Interval>`.

        :param float lo:
            Lower end.
        :param float hi:
            Upper end, strictly greater than ``lo``.
        """
        lo = float(lo)
        hi = float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ConfigError(f'interval ends must be finite, got [{lo!r}, {hi!r}]')
        if not lo < hi:
            raise ConfigError(f'interval needs lo < hi, got [{lo!r}, {hi!r}]')
        self.lo = lo
        self.hi = hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def radius(self) -> float:
        """Largest absolute value attained on the interval."""
        return max(abs(self.lo), abs(self.hi))

    def contains(self, a: float) -> bool:
        return self.lo <= a <= self.hi

    def within(self, other: "Interval") -> bool:
        """Whether this interval is a subset of ``other``."""
        return other.lo <= self.lo and self.hi <= other.hi

    def check(self, a: float) -> float:
        """Return ``a`` as a float, raising :class:`DomainError` when outside."""
        a = float(a)
        if not self.contains(a):
            raise DomainError(a, self.lo, self.hi)
        return a

    def grid(self, points: int) -> np.ndarray:
        """Uniform grid with ``points`` nodes including both ends."""
        return np.linspace(self.lo, self.hi, int(points))

    def as_list(self):
        return [self.lo, self.hi]

    def __iter__(self):
        return iter((self.lo, self.hi))

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return (self.lo, self.hi) == (other.lo, other.hi)

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f'Interval({self.lo!r}, {self.hi!r})'


class EventuallyConstantPoint:
    """The point ``(x_1, ..., x_n, c, c, c, ...)`` of the sequence space."""

    def __init__(self, prefix: Iterable[float] = (), tail_value: float = 0.0):
        """Construct an :class:`EventuallyConstantPoint <EventuallyConstantPoint>`.

        :param prefix:
            The coordinates ``x_1, ..., x_n``; may be empty.
        :param float tail_value:
            The constant ``c`` repeated forever after the prefix.
        """
        self.prefix: Tuple[float, ...] = tuple(float(v) for v in prefix)
        self.tail_value = float(tail_value)

    @classmethod
    def constant(cls, c: float) -> "EventuallyConstantPoint":
        """The constant point ``(c, c, c, ...)``."""
        return cls((), c)

    @property
    def depth(self) -> int:
        return len(self.prefix)

    def coordinate(self, k: int) -> float:
        """Coordinate ``x_k``, counted from 1."""
        if k < 1:
            raise IndexError('coordinates are counted from 1')
        if k <= self.depth:
            return self.prefix[k - 1]
        return self.tail_value

    def head(self, n: int) -> Tuple[float, ...]:
        """The first ``n`` coordinates."""
        return tuple(self.coordinate(k) for k in range(1, n + 1))

    def shift(self) -> "EventuallyConstantPoint":
        """The image under the shift map, dropping the first coordinate."""
        if not self.prefix:
            return self
        return EventuallyConstantPoint(self.prefix[1:], self.tail_value)

    def prepend(self, a: float) -> "EventuallyConstantPoint":
        """The preimage ``(a, x_1, x_2, ...)``."""
        return EventuallyConstantPoint((a,) + self.prefix, self.tail_value)

    def validate(self, domain: Interval) -> "EventuallyConstantPoint":
        for v in self.prefix:
            domain.check(v)
        domain.check(self.tail_value)
        return self

    def as_dict(self):
        return {'prefix': list(self.prefix), 'tail_value': self.tail_value}

    def __eq__(self, other):
        if not isinstance(other, EventuallyConstantPoint):
            return NotImplemented
        return (self.prefix, self.tail_value) == (other.prefix, other.tail_value)

    def __hash__(self):
        return hash((self.prefix, self.tail_value))

    def __repr__(self):
        inner = ', '.join(repr(v) for v in self.prefix)
        return f'<EventuallyConstantPoint: ({inner}; {self.tail_value!r})>'


class PotentialFamily:
    """A product-type potential ``f(x) = sum_i f_i(x_i)`` on an interval.

    Subclasses must implement :meth:`factor`. Everything else has a generic
    implementation: tails and double tails are summed term by term until three
    consecutive increments fall below ``tol / 10``, and the neglected
    remainder is bounded from the decay the family declares through
    :meth:`decay_ratio` (geometric) or :meth:`decay_power` (integral bound).
    Families with closed forms override the evaluators.
    """
    name = "custom"

    # declared K with c_i <= K * 2**-i, or None
    lipschitz_scale: Optional[float] = None

    # False when f itself is not Lipschitz for the product metric
    is_lipschitz = True

    def __init__(self, domain: Interval, tol: float = DEFAULT_TOL):
        """
        :param Interval domain:
            The state space of every coordinate.
        :param float tol:
            Absolute accuracy requested from the evaluators.
        """
        if tol <= 0:
            raise ConfigError(f'family tolerance must be positive, got {tol!r}')
        self.domain = domain
        self.tol = float(tol)

    def factor(self, i: int, a: float) -> float:
        """The factor ``f_i(a)``, ``i >= 1``."""
        raise NotImplementedError

    def summed(self, a: float) -> float:
        """``F(a) = sum_i f_i(a)``."""
        return self.tail(0, a).value

    def summed_array(self, a: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`summed`."""
        a = np.asarray(a, dtype=float)
        return np.fromiter((self.summed(float(v)) for v in a.ravel()), dtype=float, count=a.size).reshape(a.shape)

    def decay_ratio(self, a: float) -> Optional[float]:
        """A ``q < 1`` with ``|f_{i+1}(a)| <= q |f_i(a)|`` for all ``i``, if known."""
        return None

    def decay_power(self) -> Optional[Tuple[float, float]]:
        """A pair ``(C, p)`` with ``|f_i(a)| <= C i**-p`` on the domain, if known."""
        return None

    def tail(self, j: int, a: float) -> Estimate:
        """``T_j(a) = sum_{i>j} f_i(a)`` with an absolute error bound."""
        return self._truncated_series('tail', a, first=j + 1, weight=lambda i: 1.0)

    def double_tail(self, m: int, c: float) -> Estimate:
        """``sum_{j>m} T_j(c)`` with an absolute error bound.

        Each ``f_i`` with ``i > m + 1`` appears in ``i - m - 1`` of the tails.
        """
        return self._truncated_series('double_tail', c, first=m + 2, weight=lambda i: float(i - m - 1), offset=m + 1)

    def lipschitz_bound(self, i: int) -> Optional[float]:
        """A ``c_i`` with ``c_i >= Lip(f_i)``, or ``None`` when unavailable."""
        return None

    def uniform_double_tail_bound(self) -> Optional[float]:
        """A bound on ``sum_j sup_a |T_j(a)|``, or ``None`` when unavailable."""
        return None

    def d1(self, a: float) -> Optional[float]:
        """Analytic ``F'(a)``, or ``None``."""
        return None

    def d2(self, a: float) -> Optional[float]:
        """Analytic ``F''(a)``, or ``None``."""
        return None

    def describe(self) -> dict:
        """The configuration this family would be rebuilt from."""
        return {'family': self.name, 'domain': self.domain.as_list()}

    def _truncated_series(self, series: str, a: float, first: int, weight, offset: int = 0) -> Estimate:
        threshold = self.tol / 10
        terms = []
        quiet = 0
        i = first
        term = 0.0
        while True:
            term = weight(i) * self.factor(i, a)
            terms.append(term)
            quiet = quiet + 1 if abs(term) < threshold else 0
            if quiet == 3:
                break
            if len(terms) >= MAX_TERMS:
                raise DivergenceError(series, a, f'{series} at {a!r} did not settle after {MAX_TERMS} terms')
            i += 1

        remainder = self._remainder(series, a, i, abs(self.factor(i, a)), offset)
        value = math.fsum(terms)
        rounding = 2 * EPS * math.fsum(abs(t) for t in terms)
        logger.debug(f'{series} at {a!r} truncated after {len(terms)} terms, remainder {remainder!r}')
        return Estimate(value, remainder + rounding)

    def _remainder(self, series: str, a: float, last: int, last_abs: float, offset: int) -> float:
        # bound for sum_{k > last} w_k |f_k(a)|, w_k = 1 or k - offset
        q = self.decay_ratio(a)
        if q is not None and 0 <= q < 1:
            if series == 'tail':
                return last_abs * q / (1 - q)
            return last_abs * ((last - offset) * q / (1 - q) + q / (1 - q) ** 2)

        power = self.decay_power()
        if power is not None:
            constant, p = power
            if series == 'tail' and p > 1:
                return constant * last ** (1 - p) / (p - 1)
            if series == 'double_tail' and p > 2:
                return constant * last ** (2 - p) / (p - 2)
            raise DivergenceError(series, a, f'decay exponent {p!r} is too small to bound the {series}')

        raise DivergenceError(series, a, f'{self.name} declares no decay to bound the {series} remainder')

    def __repr__(self):
        return f'<xygibbs.{self.__class__.__name__}: domain={self.domain!r}>'


def eval_F(family: PotentialFamily, a: float) -> float:
    """Evaluate ``F(a) = f(a, a, a, ...)``.

    :param PotentialFamily family:
        The potential.
    :param float a:
        A point of the domain.
    :rtype: float
    """
    a = family.domain.check(a)
    value = family.summed(a)
    if not math.isfinite(value):
        raise DomainError(a, family.domain.lo, family.domain.hi, f'F({a!r}) is not finite')
    return value


def eval_f(family: PotentialFamily, x: EventuallyConstantPoint) -> Estimate:
    """Evaluate ``f(x) = sum_{j<=n} f_j(x_j) + T_n(c)``.

    :param PotentialFamily family:
        The potential.
    :param EventuallyConstantPoint x:
        The point, with every coordinate in the domain.
    :rtype: Estimate
    """
    x.validate(family.domain)
    head = [family.factor(j, v) for j, v in enumerate(x.prefix, start=1)]
    rest = family.tail(x.depth, x.tail_value)
    value = math.fsum(head) + rest.value
    error = rest.error + 2 * EPS * (math.fsum(abs(t) for t in head) + abs(rest.value))
    return Estimate(value, error)


def eval_u(family: PotentialFamily, x: EventuallyConstantPoint) -> Estimate:
    """Evaluate the calibrated subaction ``u(x) = sum_j T_j(x_j)``.

    For an eventually constant point this is
    ``sum_{j<=n} T_j(x_j) + sum_{j>n} T_j(c)``.

    :param PotentialFamily family:
        The potential.
    :param EventuallyConstantPoint x:
        The point, with every coordinate in the domain.
    :rtype: Estimate
    """
    x.validate(family.domain)
    head = [family.tail(j, v) for j, v in enumerate(x.prefix, start=1)]
    rest = family.double_tail(x.depth, x.tail_value)
    value = math.fsum(t.value for t in head) + rest.value
    error = math.fsum(t.error for t in head) + rest.error
    error += 2 * EPS * (math.fsum(abs(t.value) for t in head) + abs(rest.value))
    return Estimate(value, error)


class HypothesisCheck:
    """Outcome of :func:`check_prop22`; truthy when the hypothesis holds."""

    def __init__(
        self,
        ok: bool,
        route: Optional[str],
        reason: Optional[str] = None,
        lipschitz_constant: Optional[float] = None,
        oscillation_bound: Optional[float] = None,
        subaction_at_anchor: Optional[float] = None,
    ):
        self.ok = ok
        # 'geometric' or 'uniform_tail'
        self.route = route
        self.reason = reason
        self.lipschitz_constant = lipschitz_constant
        self.oscillation_bound = oscillation_bound
        self.subaction_at_anchor = subaction_at_anchor

    def __bool__(self):
        return self.ok

    def as_dict(self):
        return {
            'ok': self.ok,
            'route': self.route,
            'reason': self.reason,
            'lipschitz_constant': self.lipschitz_constant,
            'oscillation_bound': self.oscillation_bound,
            'subaction_at_anchor': self.subaction_at_anchor,
        }

    def __repr__(self):
        return f'<HypothesisCheck: ok={self.ok} route={self.route} reason={self.reason}>'


def check_prop22(
    family: PotentialFamily,
    anchor: EventuallyConstantPoint,
    K: Optional[float] = None,
    horizon: int = CHECK_HORIZON,
) -> HypothesisCheck:
    """Certify that ``sum_j sum_{i>j} f_i(x_j)`` is finite for every ``x``.

    Two routes are tried. If ``c_i <= K 2**-i`` up to the check horizon, the
    subaction at any point differs from its value at ``anchor`` by at most
    ``K (hi - lo)``, so finiteness at the anchor is enough; ``f`` is then
    Lipschitz with constant ``K``. Otherwise a family-declared uniform bound
    on ``sum_j sup |T_j|`` certifies finiteness directly.

    :param PotentialFamily family:
        The potential.
    :param EventuallyConstantPoint anchor:
        A point where the subaction is evaluated.
    :param float K:
        (Optional) The geometric constant; defaults to the family's declared one.
    :param int horizon:
        Number of indices checked.
    :rtype: HypothesisCheck
    """
    try:
        at_anchor = eval_u(family, anchor).value
    except DivergenceError:
        return HypothesisCheck(False, None, reason='divergent_subaction')
    if not math.isfinite(at_anchor):
        return HypothesisCheck(False, None, reason='divergent_subaction')

    K = family.lipschitz_scale if K is None else K
    bounds = [family.lipschitz_bound(i) for i in range(1, horizon + 1)]
    available = all(b is not None for b in bounds)

    if available and K is not None:
        if all(b <= K * 2.0 ** -i * (1 + 1e-12) for i, b in enumerate(bounds, start=1)):
            return HypothesisCheck(
                True, 'geometric',
                lipschitz_constant=K,
                oscillation_bound=K * family.domain.width,
                subaction_at_anchor=at_anchor,
            )

    uniform = family.uniform_double_tail_bound()
    if uniform is not None and math.isfinite(uniform):
        return HypothesisCheck(
            True, 'uniform_tail',
            oscillation_bound=2 * uniform,
            subaction_at_anchor=at_anchor,
        )

    reason = 'bounds_unavailable' if not available else 'not_geometric'
    return HypothesisCheck(False, None, reason=reason, subaction_at_anchor=at_anchor)


def second_derivative(family: PotentialFamily, a: float, step: Optional[float] = None) -> Estimate:
    """``F''(a)``, analytic when the family offers it.

    Otherwise second differences at steps ``h`` and ``h/2`` are combined by
    Richardson extrapolation, with ``h = 1e-4 (hi - lo)`` by default; the
    error estimate is the disagreement between the extrapolated value and the
    finer difference. One-sided differences are used within ``2h`` of an end.

    :param PotentialFamily family:
        The potential.
    :param float a:
        A point of the domain.
    :param float step:
        (Optional) The coarse step ``h``.
    :rtype: Estimate
    """
    a = family.domain.check(a)
    analytic = family.d2(a)
    if analytic is not None and math.isfinite(analytic):
        return Estimate(float(analytic), family.tol)

    h = step or 1e-4 * family.domain.width
    lo, hi = family.domain.lo, family.domain.hi
    F = family.summed
    if a - 2 * h >= lo and a + 2 * h <= hi:
        def difference(s):
            return (F(a + s) - 2 * F(a) + F(a - s)) / (s * s)
        order = 2
    else:
        sign = 1.0 if a + 2 * h <= hi else -1.0

        def difference(s):
            s = sign * s
            return (F(a) - 2 * F(a + s) + F(a + 2 * s)) / (s * s)
        order = 1

    coarse = difference(h)
    fine = difference(h / 2)
    scale = 2 ** order
    extrapolated = (scale * fine - coarse) / (scale - 1)
    return Estimate(extrapolated, abs(extrapolated - fine))
