"""
This module contains the Ruelle operator of ``beta f`` and its explicit eigendata.

For a product-type potential the leading eigenvalue is
``lambda_beta = int exp(beta F)``, the eigenfunction is ``h_beta = exp(beta u)``
with ``u(x) = sum_j T_j(x_j)``, and the normalised potential depends on the
first coordinate only, through the density ``exp(beta F(a)) / lambda_beta``.
Everything is carried in log scale.
"""

import logging
import math
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

import numpy as np

from xygibbs.exceptions import ConfigError
from xygibbs.potential import EventuallyConstantPoint, PotentialFamily, eval_f, eval_u
from xygibbs.quadrature import SHIFT_GRID, QuadratureResult, family_peaks, integrate, log_partition
from xygibbs.settings import DEFAULT, Settings

logger = logging.getLogger(__name__)


class EigenData(NamedTuple):
    """Leading eigenvalue of the Ruelle operator of ``beta f``, in log scale."""
    beta: float
    log_lambda: float
    family: PotentialFamily
    log_error: float = 0.0

    @property
    def normalizer(self) -> float:
        """``lambda_beta`` itself; ``inf`` when it overflows."""
        try:
            return math.exp(self.log_lambda)
        except OverflowError:
            return math.inf


def eigendata(family: PotentialFamily, beta: float, settings: Settings = DEFAULT) -> EigenData:
    result = log_partition(family, float(beta), settings)
    raw = result.raw
    return EigenData(float(beta), result.log_value, family, raw.abs_error_estimate / raw.value)


class TestFunction:
    """A function of the first ``depth`` coordinates of a point.

    The wrapped callable receives the coordinates ``y_1, ..., y_depth`` as
    positional arguments. Test functions built with :meth:`of_point` receive
    the whole :class:`EventuallyConstantPoint` instead and have no depth.
    """
    __test__ = False

    def __init__(self, depth: Optional[int], fn: Callable):
        if depth is not None and depth < 1:
            raise ConfigError(f'test function depth must be at least 1, got {depth!r}')
        self.depth = depth
        self.fn = fn

    @classmethod
    def of_point(cls, fn: Callable[[EventuallyConstantPoint], float]) -> "TestFunction":
        return cls(None, fn)

    @classmethod
    def from_factors(cls, factors: Sequence[Callable]) -> "TestFunction":
        """The product ``prod_k phi_k(y_k)`` of one-dimensional functions."""
        factors = list(factors)
        if not factors:
            raise ConfigError('a product test function needs at least one factor')

        def product(*coordinates):
            value = 1.0
            for phi, y in zip(factors, coordinates):
                value = value * phi(y)
            return value
        return cls(len(factors), product)

    def __call__(self, x: EventuallyConstantPoint) -> float:
        if self.depth is None:
            return float(self.fn(x))
        return float(self.fn(*x.head(self.depth)))

    def along_fiber(self, x: EventuallyConstantPoint) -> Callable:
        """``a -> phi(a, x_1, x_2, ...)``."""
        if self.depth is None:
            return lambda a: self.fn(x.prepend(a))
        rest = x.head(self.depth - 1)
        return lambda a: self.fn(a, *rest)

    def __repr__(self):
        return f'<TestFunction: depth={self.depth}>'


def _fiber_log_kernel(family: PotentialFamily, beta: float, x: EventuallyConstantPoint) -> Callable[[float], float]:
    def log_kernel(a: float) -> float:
        return beta * eval_f(family, x.prepend(a)).value
    return log_kernel


def _shift_and_breaks(fn: Callable[[float], float], family: PotentialFamily, settings: Settings):
    grid = family.domain.grid(SHIFT_GRID)
    values = [fn(float(t)) for t in grid]
    best = int(np.argmax(values))
    return values[best], [float(grid[best])] + [p.location for p in family_peaks(family, settings)]


def apply_L(
    family: PotentialFamily,
    beta: float,
    phi: TestFunction,
    x: EventuallyConstantPoint,
    settings: Settings = DEFAULT,
) -> float:
    """Apply the Ruelle operator of ``beta f`` to ``phi`` at ``x``.

    Computes ``int exp(beta f(a x)) phi(a x) da`` with ``f(a x)`` evaluated
    by :func:`eval_f` on ``(a, x_1, ..., x_n; c)``.

    :param PotentialFamily family:
        The potential.
    :param float beta:
        Inverse temperature.
    :param TestFunction phi:
        The test function.
    :param EventuallyConstantPoint x:
        The point.
    :rtype: float
    """
    shift, raw = _apply(family, beta, phi, x, settings)
    return math.exp(shift) * raw.value


def log_apply_L(
    family: PotentialFamily,
    beta: float,
    phi: TestFunction,
    x: EventuallyConstantPoint,
    settings: Settings = DEFAULT,
    log_phi: bool = False,
) -> float:
    """``log`` of :func:`apply_L` for a positive ``phi``, without overflow.

    With ``log_phi`` set, ``phi`` returns ``log phi`` and the fiber integrand
    ``exp(beta f(a x) + log phi(a x))`` is formed in log scale, which is how
    ``h_beta = exp(beta u)`` is applied at large ``beta``.
    """
    shift, raw = _apply(family, beta, phi, x, settings, log_phi)
    if not raw.value > 0:
        raise ConfigError(f'log_apply_L needs a positive test function, integral was {raw.value!r}')
    return shift + math.log(raw.value)


def _apply(family, beta, phi, x, settings, log_phi=False):
    x.validate(family.domain)
    log_kernel = _fiber_log_kernel(family, beta, x)
    fiber = phi.along_fiber(x)

    if log_phi:
        def log_weight(a: float) -> float:
            return log_kernel(a) + float(fiber(a))
        shift, breaks = _shift_and_breaks(log_weight, family, settings)

        def integrand(a: float) -> float:
            return math.exp(log_weight(a) - shift)
    else:
        shift, breaks = _shift_and_breaks(log_kernel, family, settings)

        def integrand(a: float) -> float:
            return math.exp(log_kernel(a) - shift) * float(fiber(a))

    raw = integrate(
        integrand, family.domain,
        tol=settings.quad_tol * family.domain.width, rel_tol=settings.quad_tol,
        breakpoints=breaks, vectorized=False, max_panels=settings.max_panels,
    )
    return shift, raw


def eval_h(family: PotentialFamily, beta: float, x: EventuallyConstantPoint) -> float:
    """``log h_beta(x) = beta u(x)``.

    :rtype: float
    """
    if beta == 0:
        x.validate(family.domain)
        return 0.0
    return beta * eval_u(family, x).value


def log_normalized_density(family: PotentialFamily, beta: float, a, settings: Settings = DEFAULT):
    """``beta F(a) - log lambda_beta``; ``a`` may be an array."""
    log_lambda = log_partition(family, float(beta), settings).log_value
    if np.ndim(a) == 0:
        a = family.domain.check(a)
        return beta * family.summed(a) - log_lambda
    return beta * family.summed_array(a) - log_lambda


def normalized_density(family: PotentialFamily, beta: float, a: float, settings: Settings = DEFAULT) -> float:
    """The density ``exp(beta F(a)) / lambda_beta`` of the one-coordinate marginal.

    :param PotentialFamily family:
        The potential.
    :param float beta:
        Inverse temperature, ``beta >= 0``.
    :param float a:
        A point of the domain.
    :rtype: float
    """
    if not beta >= 0:
        raise ConfigError(f'beta must be nonnegative, got {beta!r}')
    return math.exp(log_normalized_density(family, beta, a, settings))


def normalized_potential(
    family: PotentialFamily,
    beta: float,
    x: EventuallyConstantPoint,
    settings: Settings = DEFAULT,
) -> float:
    """``beta f(x) + log h(x) - log h(sigma x) - log lambda`` at ``x``.

    :rtype: float
    """
    log_lambda = log_partition(family, float(beta), settings).log_value
    energy = eval_f(family, x).value
    if beta == 0:
        return -log_lambda
    return beta * (energy + eval_u(family, x).value - eval_u(family, x.shift()).value) - log_lambda


def eigen_residual(
    family: PotentialFamily,
    beta: float,
    x: EventuallyConstantPoint,
    settings: Settings = DEFAULT,
) -> float:
    """``|log L(h_beta)(x) - log lambda_beta - log h_beta(x)|``.

    ``L(h_beta)(x)`` is the fiber integral of
    ``exp(beta f(a x) + beta u(a x))`` computed by :func:`log_apply_L`, with
    both terms evaluated on the point ``a x``.

    :rtype: float
    """
    x.validate(family.domain)
    log_h = TestFunction.of_point(lambda y: eval_h(family, beta, y))
    log_applied = log_apply_L(family, beta, log_h, x, settings, log_phi=True)
    log_lambda = log_partition(family, float(beta), settings).log_value
    residual = abs(log_applied - log_lambda - eval_h(family, beta, x))
    logger.debug(f'eigen residual at {x!r}, beta={beta!r}: {residual!r}')
    return residual


def normalization_residual(
    family: PotentialFamily,
    beta: float,
    x: EventuallyConstantPoint,
    settings: Settings = DEFAULT,
) -> float:
    """``|L_{f~}(1)(x) - 1|`` for the normalised potential.

    :rtype: float
    """
    x.validate(family.domain)

    def integrand(a: float) -> float:
        return math.exp(normalized_potential(family, beta, x.prepend(a), settings))

    raw = integrate(
        integrand, family.domain,
        tol=1e-300, rel_tol=settings.quad_tol,
        breakpoints=[p.location for p in family_peaks(family, settings)],
        vectorized=False, max_panels=settings.max_panels,
    )
    return abs(raw.value - 1.0)


def _density_integral(family, beta, phi, settings) -> QuadratureResult:
    def integrand(t):
        return phi(t) * np.exp(log_normalized_density(family, beta, t, settings))

    return integrate(
        integrand, family.domain,
        tol=settings.quad_tol, rel_tol=settings.quad_tol,
        breakpoints=[p.location for p in family_peaks(family, settings)],
        max_panels=settings.max_panels,
    )


def dual_fixed_point_residual(
    family: PotentialFamily,
    beta: float,
    factors: Iterable[Callable],
    settings: Settings = DEFAULT,
) -> float:
    """``|int L_{f~}(phi) d mu~ - int phi d mu~|`` for ``phi = prod_k phi_k(x_k)``.

    Under the product measure ``mu~`` with density ``g~`` on every coordinate,
    ``L_{f~}(phi)(x) = int exp(f~(a x)) phi_1(a) da * prod_{k>=2} phi_k(x_{k-1})``.
    The left side uses ``exp(f~)`` assembled from the normalised potential at
    a reference point, the right side the density ``g~`` directly.

    :param factors:
        One-dimensional vectorised functions ``phi_1, ..., phi_n``.
    :rtype: float
    """
    factors = list(factors)
    if not factors:
        raise ConfigError('the dual fixed point check needs at least one factor')
    beta = float(beta)
    reference = EventuallyConstantPoint.constant(0.5 * (family.domain.lo + family.domain.hi))
    first = factors[0]

    def kernel_integrand(a: float) -> float:
        return float(first(a)) * math.exp(normalized_potential(family, beta, reference.prepend(a), settings))

    pushed = integrate(
        kernel_integrand, family.domain,
        tol=settings.quad_tol, rel_tol=settings.quad_tol,
        breakpoints=[p.location for p in family_peaks(family, settings)],
        vectorized=False, max_panels=settings.max_panels,
    ).value

    marginals = [_density_integral(family, beta, phi, settings).value for phi in factors]
    lhs = pushed * math.prod(marginals[1:])
    rhs = math.prod(marginals)
    return abs(lhs - rhs)
