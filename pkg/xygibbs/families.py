"""
This module contains the built-in potential families and the config loader.
"""

import functools
import logging
import math
from typing import Any, Dict, Optional, Sequence

import mpmath
import numpy as np
from numpy.polynomial import Polynomial

from xygibbs.exceptions import ConfigError, DivergenceError
from xygibbs.potential import DEFAULT_TOL, EPS, Estimate, Interval, PotentialFamily

logger = logging.getLogger(__name__)

# beyond this index the partial sums are replaced by series / Hurwitz forms
PARTIAL_SUM_LIMIT = 64


class ZeroFamily(PotentialFamily):
    """The potential ``f = 0``."""
    name = "zero"
    lipschitz_scale = 1.0

    def __init__(self, domain: Optional[Interval] = None, tol: float = DEFAULT_TOL):
        super().__init__(domain or Interval(0.0, 1.0), tol)

    def factor(self, i: int, a: float) -> float:
        return 0.0

    def summed(self, a: float) -> float:
        return 0.0

    def summed_array(self, a: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(a, dtype=float))

    def tail(self, j: int, a: float) -> Estimate:
        return Estimate(0.0, 0.0)

    def double_tail(self, m: int, c: float) -> Estimate:
        return Estimate(0.0, 0.0)

    def lipschitz_bound(self, i: int) -> float:
        return 0.0

    def uniform_double_tail_bound(self) -> float:
        return 0.0

    def d1(self, a: float) -> float:
        return 0.0

    def d2(self, a: float) -> float:
        return 0.0


class Example1Family(PotentialFamily):
    """``f_i(a) = -a**(2i)``, so that ``F(a) = -a**2 / (1 - a**2)``.

    On the default domain ``[-1/2, 1/2]`` the factors satisfy
    ``Lip(f_i) <= 2i 2**(1-2i) <= 4 * 2**-i``. Any domain inside ``(-1, 1)``
    is accepted.
    """
    name = "example1"

    def __init__(self, domain: Optional[Interval] = None, tol: float = DEFAULT_TOL):
        domain = domain or Interval(-0.5, 0.5)
        if not domain.radius < 1:
            raise ConfigError(f'example1 needs a domain inside (-1, 1), got {domain.as_list()}')
        super().__init__(domain, tol)
        r = domain.radius
        self.lipschitz_scale = 4.0 if r <= 0.5 else None

    def factor(self, i: int, a: float) -> float:
        return -(a * a) ** i

    def summed(self, a: float) -> float:
        s = a * a
        return -s / (1 - s)

    def summed_array(self, a: np.ndarray) -> np.ndarray:
        s = np.square(np.asarray(a, dtype=float))
        return -s / (1 - s)

    def decay_ratio(self, a: float) -> float:
        return a * a

    def tail(self, j: int, a: float) -> Estimate:
        s = a * a
        value = -s ** (j + 1) / (1 - s)
        return Estimate(value, 4 * EPS * abs(value))

    def double_tail(self, m: int, c: float) -> Estimate:
        s = c * c
        value = -s ** (m + 2) / (1 - s) ** 2
        return Estimate(value, 6 * EPS * abs(value))

    def lipschitz_bound(self, i: int) -> float:
        r = self.domain.radius
        return 2 * i * r ** (2 * i - 1)

    def uniform_double_tail_bound(self) -> float:
        s = self.domain.radius ** 2
        return s * s / (1 - s) ** 2

    def d1(self, a: float) -> float:
        s = a * a
        return -2 * a / (1 - s) ** 2

    def d2(self, a: float) -> float:
        s = a * a
        return -2 / (1 - s) ** 2 - 8 * s / (1 - s) ** 3


@functools.lru_cache(maxsize=1 << 16)
def _polylog(s: float, z: float) -> float:
    # non-integer orders come back complex near z = -1 with a zero imaginary part
    return float(mpmath.re(mpmath.polylog(s, z)))


@functools.lru_cache(maxsize=1 << 12)
def _hurwitz(s: float, v: float) -> float:
    return float(mpmath.re(mpmath.zeta(s, v)))


def _alternating_hurwitz(s: float, v: float) -> float:
    """``sum_{t>=0} (-1)**t (v+t)**-s`` for ``s > 1``."""
    return 2.0 ** -s * (_hurwitz(s, v / 2) - _hurwitz(s, (v + 1) / 2))


class PolylogKernel:
    """Vectorised ``Li_s(z)`` for real ``s > 1`` and ``z`` in ``[-1, 1]``.

    ``|z| <= 1/2`` uses the power series. Above ``1/2`` the expansion in
    ``mu = log z`` is used, whose coefficients ``zeta(s - k) / k!`` are
    computed once. Below ``-1/2`` the duplication formula
    ``Li_s(z) = 2**(1-s) Li_s(z**2) - Li_s(-z)`` brings the argument back to
    ``[1/4, 1]``. Orders within ``1e-3`` of an integer, but not on it, are
    handed to mpmath point by point, since both halves of the log expansion
    blow up there.
    """
    POWER_SERIES_TERMS = 64
    LOG_SERIES_TERMS = 32
    LOG_SERIES_FROM = 0.5
    NEAR_INTEGER = 1e-3

    def __init__(self, s: float):
        self.s = float(s)
        nearest = round(self.s)
        self.integer = self.s == nearest
        self.fallback = not self.integer and abs(self.s - nearest) < self.NEAR_INTEGER
        k = np.arange(1, self.POWER_SERIES_TERMS + 1, dtype=float)
        self._power = np.concatenate(([0.0], k ** -self.s))
        if self.fallback:
            return
        coeffs = []
        for k in range(self.LOG_SERIES_TERMS):
            if self.integer and k == nearest - 1:
                coeffs.append(0.0)
            else:
                coeffs.append(float(mpmath.zeta(self.s - k) / mpmath.factorial(k)))
        self._log = np.array(coeffs)
        if self.integer:
            n = int(nearest)
            self._harmonic = math.fsum(1.0 / j for j in range(1, n))
            self._scale = 1.0 / math.factorial(n - 1)
        else:
            self._scale = math.gamma(1 - self.s)

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.fallback:
            order = self.s
            return np.fromiter((_polylog(order, float(v)) for v in z.ravel()), dtype=float, count=z.size).reshape(z.shape)
        flat = z.ravel()
        out = np.empty_like(flat)
        low = flat < -self.LOG_SERIES_FROM
        high = flat > self.LOG_SERIES_FROM
        mid = ~(low | high)
        out[mid] = np.polynomial.polynomial.polyval(flat[mid], self._power)
        out[high] = self._near_one(flat[high])
        if low.any():
            w = -flat[low]
            out[low] = 2.0 ** (1 - self.s) * self(w * w) - self._near_one(w)
        return out.reshape(z.shape)

    def _near_one(self, z: np.ndarray) -> np.ndarray:
        mu = np.log(z)
        regular = np.polynomial.polynomial.polyval(mu, self._log)
        if not self.integer:
            return regular + self._scale * (-mu) ** (self.s - 1)
        n = int(round(self.s))
        # mu**(n-1) vanishes at mu = 0, so the log is only taken where mu < 0
        safe = np.where(mu < 0, -mu, 1.0)
        return regular + self._scale * mu ** (n - 1) * (self._harmonic - np.log(safe))


class PolylogFamily(PotentialFamily):
    """``f_i(a) = a**i / i**gamma``, so that ``F = Li_gamma``.

    The family is defined for ``gamma > 1``; the subaction and the Ruelle
    eigenfunction need ``gamma > 2`` at the ends ``a = +-1``. The factors are
    Lipschitz with ``c_i = i**(1-gamma)``, which is not geometrically
    summable, so ``f`` is not Lipschitz for the product metric.
    """
    name = "polylog"
    is_lipschitz = False

    def __init__(self, gamma: float = 3.0, domain: Optional[Interval] = None, tol: float = DEFAULT_TOL):
        gamma = float(gamma)
        if not gamma > 1:
            raise ConfigError(f'polylog needs gamma > 1, got {gamma!r}')
        domain = domain or Interval(-1.0, 1.0)
        if not domain.within(Interval(-1.0, 1.0)):
            raise ConfigError(f'polylog needs a domain inside [-1, 1], got {domain.as_list()}')
        super().__init__(domain, tol)
        self.gamma = gamma
        self._kernel = PolylogKernel(gamma)

    def _li(self, shift: int, z: float) -> float:
        order = self.gamma - shift
        if order.is_integer():
            order = int(order)
        return _polylog(order, z)

    def factor(self, i: int, a: float) -> float:
        return a ** i / i ** self.gamma

    def summed(self, a: float) -> float:
        return float(self._kernel(np.array([a], dtype=float))[0])

    def summed_array(self, a: np.ndarray) -> np.ndarray:
        return self._kernel(a)

    def decay_ratio(self, a: float) -> Optional[float]:
        q = abs(a)
        return q if q < 1 else None

    def decay_power(self):
        # |f_i| <= i**-gamma; the remainder is the integral bound j**(1-gamma)/(gamma-1)
        return 1.0, self.gamma

    def tail(self, j: int, a: float) -> Estimate:
        if j == 0:
            value = self.summed(a)
            return Estimate(value, 4 * EPS * abs(value))
        if j <= PARTIAL_SUM_LIMIT:
            head = [self.factor(i, a) for i in range(1, j + 1)]
            total = self.summed(a)
            value = total - math.fsum(head)
            return Estimate(value, 4 * EPS * (abs(total) + math.fsum(abs(t) for t in head)))
        if abs(a) < 1:
            return super().tail(j, a)
        # a = +-1
        if a > 0:
            value = _hurwitz(self.gamma, j + 1)
        else:
            value = (-1) ** (j + 1) * _alternating_hurwitz(self.gamma, j + 1)
        return Estimate(value, 8 * EPS * abs(value))

    def double_tail(self, m: int, c: float) -> Estimate:
        if abs(c) == 1 and not self.gamma > 2:
            raise DivergenceError('double_tail', c, f'double tail of polylog(gamma={self.gamma!r}) diverges at {c!r}')
        n = m + 1
        if n <= PARTIAL_SUM_LIMIT:
            # sum_{i>n} (i - n) c**i i**-gamma
            first = self._li(1, c) - math.fsum(c ** i * i ** (1 - self.gamma) for i in range(1, n + 1))
            second = self.tail(n, c)
            value = first - n * second.value
            scale = abs(self._li(1, c)) + n * (abs(self.summed(c)) + 1)
            return Estimate(value, 8 * (n + 1) * EPS * scale + n * second.error)
        if abs(c) < 1:
            return super().double_tail(m, c)
        if c > 0:
            value = _hurwitz(self.gamma - 1, n + 1) - n * _hurwitz(self.gamma, n + 1)
        else:
            value = (-1) ** (n + 1) * (
                _alternating_hurwitz(self.gamma - 1, n + 1) - n * _alternating_hurwitz(self.gamma, n + 1))
        return Estimate(value, 16 * n * EPS * abs(_hurwitz(self.gamma - 1, n + 1)))

    def lipschitz_bound(self, i: int) -> float:
        r = self.domain.radius
        return i ** (1 - self.gamma) * r ** (i - 1)

    def uniform_double_tail_bound(self) -> Optional[float]:
        if not self.gamma > 2:
            return None
        g = self.gamma
        return 1 / (g - 1) + 1 / ((g - 1) * (g - 2))

    def d1(self, a: float) -> Optional[float]:
        if a == 0:
            return 1.0
        if a == 1 and not self.gamma > 2:
            return None
        return self._li(1, a) / a

    def d2(self, a: float) -> Optional[float]:
        if a == 0:
            return 2.0 ** (1 - self.gamma)
        if a == 1 and not self.gamma > 3:
            return None
        return (self._li(2, a) - self._li(1, a)) / (a * a)

    def describe(self) -> dict:
        described = super().describe()
        described['gamma'] = self.gamma
        return described

    def __repr__(self):
        return f'<xygibbs.PolylogFamily: gamma={self.gamma!r} domain={self.domain!r}>'


class SingleCoordinateFamily(PotentialFamily):
    """``f_1`` a polynomial and ``f_i = 0`` for ``i >= 2``, so ``F = f_1``.

    Any polynomial ``F`` is reachable this way, which is how double wells are
    built.
    """
    name = "single"

    def __init__(self, coeffs: Sequence[float], domain: Optional[Interval] = None, tol: float = DEFAULT_TOL):
        """
        :param coeffs:
            Coefficients of ``f_1``, lowest degree first.
        :param Interval domain:
            (Optional) The domain, ``[-1, 1]`` by default.
        """
        coeffs = [float(c) for c in coeffs]
        if not coeffs:
            raise ConfigError('single family needs at least one coefficient')
        if not all(math.isfinite(c) for c in coeffs):
            raise ConfigError(f'coefficients must be finite, got {coeffs!r}')
        super().__init__(domain or Interval(-1.0, 1.0), tol)
        self.coeffs = coeffs
        self.poly = Polynomial(coeffs)
        self._p1 = self.poly.deriv(1)
        self._p2 = self.poly.deriv(2)
        self._c1 = self._first_lipschitz_bound()
        self.lipschitz_scale = 2 * self._c1 if self._c1 > 0 else 1.0

    def factor(self, i: int, a: float) -> float:
        return float(self.poly(a)) if i == 1 else 0.0

    def summed(self, a: float) -> float:
        return float(self.poly(a))

    def summed_array(self, a: np.ndarray) -> np.ndarray:
        return self.poly(np.asarray(a, dtype=float))

    def tail(self, j: int, a: float) -> Estimate:
        if j == 0:
            value = self.summed(a)
            return Estimate(value, 4 * len(self.coeffs) * EPS * max(1.0, abs(value)))
        return Estimate(0.0, 0.0)

    def double_tail(self, m: int, c: float) -> Estimate:
        return Estimate(0.0, 0.0)

    def _first_lipschitz_bound(self) -> float:
        # |p'| is maximal at an end or at a real root of p''
        candidates = [self.domain.lo, self.domain.hi]
        if self._p2.degree() >= 1:
            candidates += [r.real for r in self._p2.roots() if abs(r.imag) < 1e-12 and self.domain.contains(r.real)]
        return max(abs(float(self._p1(t))) for t in candidates)

    def lipschitz_bound(self, i: int) -> float:
        return self._c1 if i == 1 else 0.0

    def uniform_double_tail_bound(self) -> float:
        return 0.0

    def d1(self, a: float) -> float:
        return float(self._p1(a))

    def d2(self, a: float) -> float:
        return float(self._p2(a))

    def describe(self) -> dict:
        described = super().describe()
        described['coeffs'] = list(self.coeffs)
        return described

    def __repr__(self):
        return f'<xygibbs.SingleCoordinateFamily: coeffs={self.coeffs!r} domain={self.domain!r}>'


FAMILIES = {
    ZeroFamily.name: ZeroFamily,
    Example1Family.name: Example1Family,
    PolylogFamily.name: PolylogFamily,
    SingleCoordinateFamily.name: SingleCoordinateFamily,
}


def _domain_from_config(raw: Any) -> Optional[Interval]:
    if raw is None:
        return None
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise ConfigError(f'domain must be a [lo, hi] pair, got {raw!r}')
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        raise ConfigError(f'domain ends must be numbers, got {raw!r}')
    return Interval(raw[0], raw[1])


def family_from_config(config: Dict[str, Any], tol: float = DEFAULT_TOL) -> PotentialFamily:
    """Build a family from its JSON object.

    :param dict config:
        ``{"family": "example1" | "polylog" | "zero" | "single", "gamma": ...,
        "domain": [lo, hi], "coeffs": [...]}``; keys other than these are
        ignored so a config file may carry run fields too.
    :param float tol:
        Absolute accuracy of the evaluators.
    :rtype: PotentialFamily
    """
    if not isinstance(config, dict):
        raise ConfigError(f'family config must be an object, got {type(config).__name__}')
    name = config.get('family')
    if name not in FAMILIES:
        raise ConfigError(f'unknown family {name!r}, expected one of {sorted(FAMILIES)}')
    domain = _domain_from_config(config.get('domain'))

    if name == PolylogFamily.name:
        gamma = config.get('gamma', 3.0)
        if not isinstance(gamma, (int, float)) or isinstance(gamma, bool):
            raise ConfigError(f'gamma must be a number, got {gamma!r}')
        family = PolylogFamily(gamma, domain, tol)
    elif name == SingleCoordinateFamily.name:
        coeffs = config.get('coeffs')
        if not isinstance(coeffs, list) or not all(
                isinstance(c, (int, float)) and not isinstance(c, bool) for c in coeffs):
            raise ConfigError(f'single family needs a list of numeric coeffs, got {coeffs!r}')
        family = SingleCoordinateFamily(coeffs, domain, tol)
    else:
        family = FAMILIES[name](domain, tol)

    logger.debug(f'built {family!r}')
    return family
