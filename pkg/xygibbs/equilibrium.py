"""
This module contains the product equilibrium measures and their thermodynamics.

The equilibrium measure of ``beta f`` is the i.i.d. product of the
one-coordinate density ``g~(a) = exp(beta F(a)) / lambda_beta``. Cylinder
masses therefore factor into one-dimensional integrals, and entropy and
pressure are one-dimensional quadratures.
"""

import logging
import math
import threading
from typing import Iterable, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator

from xygibbs.exceptions import ConfigError, DomainError
from xygibbs.potential import Interval, PotentialFamily
from xygibbs.quadrature import family_peaks, integrate, log_integral_exp, log_partition
from xygibbs.settings import DEFAULT, Settings
from xygibbs.transfer import log_normalized_density

logger = logging.getLogger(__name__)

TILDE = "tilde"
PLAIN = "plain"
# smallest cdf step kept in the inverse table; smaller steps give pchip
# slopes that overflow
CDF_STEP = 1e-13


class Cylinder:
    """The product ``A_1 x ... x A_n`` of subintervals of the domain."""

    def __init__(self, boxes: Sequence[Interval]):
        """Construct a :class:`Cylinder <Cylinder>`.

        :param boxes:
            The intervals ``A_1, ..., A_n``, at least one.
        """
        boxes = list(boxes)
        if not boxes:
            raise ConfigError('a cylinder needs at least one box')
        self.boxes: List[Interval] = boxes

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "Cylinder":
        """Build a cylinder from ``[[lo, hi], ...]``."""
        if not isinstance(pairs, (list, tuple)):
            raise ConfigError(f'a cylinder is a list of [lo, hi] pairs, got {pairs!r}')
        boxes = []
        for pair in pairs:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError(f'cylinder boxes must be [lo, hi] pairs, got {pair!r}')
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair):
                raise ConfigError(f'cylinder box ends must be numbers, got {pair!r}')
            lo, hi = float(pair[0]), float(pair[1])
            if not lo < hi:
                raise DomainError(lo, lo, hi, f'cylinder box [{lo!r}, {hi!r}] is empty')
            boxes.append(Interval(lo, hi))
        return cls(boxes)

    def validate(self, domain: Interval) -> "Cylinder":
        for box in self.boxes:
            if not box.within(domain):
                raise DomainError(box.lo, domain.lo, domain.hi, f'box {box!r} is not inside the domain {domain!r}')
        return self

    def product(self, other: "Cylinder") -> "Cylinder":
        """The cylinder ``self x other`` over the concatenated coordinates."""
        return Cylinder(self.boxes + other.boxes)

    def as_list(self):
        return [box.as_list() for box in self.boxes]

    def __len__(self):
        return len(self.boxes)

    def __iter__(self):
        return iter(self.boxes)

    def __eq__(self, other):
        if not isinstance(other, Cylinder):
            return NotImplemented
        return self.boxes == other.boxes

    def __hash__(self):
        return hash(tuple(self.boxes))

    def __repr__(self):
        return f'Cylinder({self.as_list()!r})'


def _strictly_increasing(cdf: np.ndarray, nodes: np.ndarray):
    """Drop the table nodes whose cdf step is below :data:`CDF_STEP`.

    Both ends are kept, so the table still runs from 0 to 1.
    """
    keep = np.concatenate(([True], np.diff(cdf) > CDF_STEP))
    last = np.flatnonzero(keep)[-1]
    if last != len(cdf) - 1:
        # the right end takes the place of the last kept node
        keep[last] = last == 0
        keep[-1] = True
    return cdf[keep], nodes[keep]


class MarginalSpec:
    """One of the marginal measures on a single coordinate.

    ``tilde`` is the equilibrium marginal with density ``g~``; ``plain`` with
    index ``n`` is ``mu_n``, with density
    ``exp(beta sum_{i<=n} f_i(a)) / lambda_beta``, which is not a probability
    in general and is normalised before sampling.

    The inverse cumulative table used for sampling is built on first use,
    once, under a lock.
    """

    def __init__(
        self,
        family: PotentialFamily,
        beta: float,
        kind: str = TILDE,
        n: Optional[int] = None,
        settings: Settings = DEFAULT,
    ):
        if kind not in (TILDE, PLAIN):
            raise ConfigError(f'marginal kind must be {TILDE!r} or {PLAIN!r}, got {kind!r}')
        if kind == PLAIN and (n is None or n < 1):
            raise ConfigError(f'the plain marginal needs an index n >= 1, got {n!r}')
        if not beta >= 0:
            raise ConfigError(f'beta must be nonnegative, got {beta!r}')
        self.family = family
        self.beta = float(beta)
        self.kind = kind
        self.n = n
        self.settings = settings
        self._lock = threading.Lock()
        self._inverse = None

    def log_density(self, a) -> np.ndarray:
        """Log of the marginal density at the points ``a``."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        if self.kind == TILDE:
            return log_normalized_density(self.family, self.beta, a, self.settings)
        log_lambda = log_partition(self.family, self.beta, self.settings).log_value
        partial = np.array([math.fsum(self.family.factor(i, float(t)) for i in range(1, self.n + 1)) for t in a])
        return self.beta * partial - log_lambda

    def density(self, a) -> np.ndarray:
        return np.exp(self.log_density(a))

    def inverse_cdf(self) -> PchipInterpolator:
        """The cached monotone interpolant of the inverse cumulative table."""
        if self._inverse is None:
            with self._lock:
                if self._inverse is None:
                    self._inverse = self._build_inverse()
        return self._inverse

    def _cdf(self, nodes: np.ndarray) -> np.ndarray:
        log_values = self.log_density(nodes)
        weights = np.exp(log_values - log_values.max())
        cdf = cumulative_trapezoid(weights, nodes, initial=0.0)
        return cdf / cdf[-1]

    def _build_inverse(self) -> PchipInterpolator:
        domain = self.family.domain
        nodes = np.union1d(
            domain.grid(self.settings.cdf_nodes),
            [p.location for p in family_peaks(self.family, self.settings)],
        )
        cdf, kept = _strictly_increasing(self._cdf(nodes), nodes)
        # the second pass adds nodes on the quantiles of the first table,
        # which resolves peaks narrower than the uniform grid
        quantiles = np.interp(np.linspace(0.0, 1.0, self.settings.cdf_nodes), cdf, kept)
        nodes = np.union1d(nodes, quantiles)
        cdf, kept = _strictly_increasing(self._cdf(nodes), nodes)
        logger.debug(f'inverse cdf table for {self!r}: {len(kept)} of {len(nodes)} nodes kept')
        return PchipInterpolator(cdf, kept)

    def __repr__(self):
        index = f' n={self.n}' if self.kind == PLAIN else ''
        return f'<MarginalSpec: {self.kind}{index} beta={self.beta!r} family={self.family.name}>'


def sample_marginal(spec: MarginalSpec, seed: Optional[int], count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. points from the marginal by inverse CDF.

    :param MarginalSpec spec:
        The marginal.
    :param int seed:
        Seed of ``numpy.random.default_rng``; identical seeds give identical draws.
    :param int count:
        Number of draws, at least 1.
    :rtype: numpy.ndarray
    """
    if count < 1:
        raise ConfigError(f'count must be at least 1, got {count!r}')
    rng = np.random.default_rng(seed)
    uniforms = rng.random(count)
    draws = spec.inverse_cdf()(uniforms)
    return np.clip(draws, spec.family.domain.lo, spec.family.domain.hi)


def cylinder_mass(spec: MarginalSpec, cylinder: Cylinder) -> float:
    """``log mu~_beta(A_1 x ... x A_n) = sum_j log int_{A_j} g~``.

    :param MarginalSpec spec:
        A ``tilde`` marginal.
    :param Cylinder cylinder:
        Boxes inside the domain.
    :rtype: float
    """
    if spec.kind != TILDE:
        raise ConfigError('cylinder masses are defined for the tilde marginal')
    family = spec.family
    cylinder.validate(family.domain)
    log_lambda = log_partition(family, spec.beta, spec.settings).log_value
    return math.fsum(
        log_integral_exp(family, box, spec.beta, spec.settings).log_value - log_lambda
        for box in cylinder
    )


def marginal_relation_residual(
    family: PotentialFamily,
    beta: float,
    j: int,
    points: Iterable[float],
    settings: Settings = DEFAULT,
) -> float:
    """``max |log g~(a) - beta T_j(a) - log mu_j(a)|`` over the given points.

    :rtype: float
    """
    if j < 1:
        raise ConfigError(f'marginal index must be at least 1, got {j!r}')
    beta = float(beta)
    log_lambda = log_partition(family, beta, settings).log_value
    worst = 0.0
    for a in points:
        a = family.domain.check(a)
        log_tilde = beta * family.summed(a) - log_lambda
        log_plain = beta * math.fsum(family.factor(i, a) for i in range(1, j + 1)) - log_lambda
        worst = max(worst, abs(log_tilde - beta * family.tail(j, a).value - log_plain))
    return worst


def _density_quadrature(family, beta, integrand, settings):
    return integrate(
        integrand, family.domain,
        tol=settings.quad_tol * 1e-3, rel_tol=settings.quad_tol,
        breakpoints=[p.location for p in family_peaks(family, settings)],
        max_panels=settings.max_panels,
    )


def entropy(family: PotentialFamily, beta: float, settings: Settings = DEFAULT) -> float:
    """The entropy ``log lambda_beta - beta int F g~`` of the equilibrium measure.

    It is computed as the differential entropy ``-int g~ log g~`` of the
    one-coordinate density, a quadrature independent of :func:`mean_f`.

    :param PotentialFamily family:
        The potential.
    :param float beta:
        Inverse temperature, ``beta >= 0``.
    :rtype: float
    """
    beta = float(beta)
    if not beta >= 0:
        raise ConfigError(f'beta must be nonnegative, got {beta!r}')
    if not family.is_lipschitz and beta > 0:
        logger.warning(f'{family.name} is not Lipschitz; the entropy formula is applied outside its usual hypothesis')

    def integrand(t):
        log_g = log_normalized_density(family, beta, t, settings)
        return -np.exp(log_g) * log_g

    return _density_quadrature(family, beta, integrand, settings).value


def mean_f(family: PotentialFamily, beta: float, settings: Settings = DEFAULT) -> float:
    """``int F g~``, the mean of ``f`` under the equilibrium measure.

    :rtype: float
    """
    beta = float(beta)
    if not beta >= 0:
        raise ConfigError(f'beta must be nonnegative, got {beta!r}')

    def integrand(t):
        return family.summed_array(t) * np.exp(log_normalized_density(family, beta, t, settings))

    return _density_quadrature(family, beta, integrand, settings).value


def variational_residual(family: PotentialFamily, beta: float, settings: Settings = DEFAULT) -> float:
    """``|log lambda_beta - entropy - beta mean_f|``.

    :rtype: float
    """
    beta = float(beta)
    log_lambda = log_partition(family, beta, settings).log_value
    return abs(log_lambda - entropy(family, beta, settings) - beta * mean_f(family, beta, settings))


class SpectralData(NamedTuple):
    beta: float
    log_lambda: float
    lambda_: float
    # None at beta = 0
    pressure_over_beta: Optional[float]

    def as_dict(self):
        return {
            'beta': self.beta,
            'log_lambda': self.log_lambda,
            'lambda': self.lambda_,
            'pressure_over_beta': self.pressure_over_beta,
        }


def spectral_data(family: PotentialFamily, beta: float, settings: Settings = DEFAULT) -> SpectralData:
    """Eigenvalue and pressure of ``beta f``.

    :rtype: SpectralData
    """
    beta = float(beta)
    log_lambda = log_partition(family, beta, settings).log_value
    try:
        lambda_ = math.exp(log_lambda)
    except OverflowError:
        lambda_ = math.inf
    return SpectralData(beta, log_lambda, lambda_, log_lambda / beta if beta > 0 else None)
