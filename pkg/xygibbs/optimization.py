"""
This module contains the zero-temperature analysis of a product-type potential.

The maximum ergodic average is ``m(f) = max_a F(a)``, attained by Dirac
measures at the maxima of ``F``. As ``beta`` grows the equilibrium marginal
concentrates on those maxima; with two interior nondegenerate maxima the
limit splits between them with weights fixed by ``F''``.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, NamedTuple, Optional, Sequence, Tuple

from xygibbs.equilibrium import Cylinder, MarginalSpec, cylinder_mass, spectral_data
from xygibbs.exceptions import (
    ConfigError,
    DegeneratePeakError,
    EndpointPeakError,
    UnsupportedMultiplicityError,
)
from xygibbs.potential import EventuallyConstantPoint, PotentialFamily, eval_F, eval_f, eval_u, second_derivative
from xygibbs.quadrature import family_peaks, maximizing_peaks
from xygibbs.query import Table
from xygibbs.settings import DEFAULT, Settings

logger = logging.getLogger(__name__)

CALIBRATION_GRID = 65
SWEEP_COLUMNS = ["beta", "log_mass", "pressure_over_beta"]


class Peak(NamedTuple):
    location: float
    value: float
    # None at an end of the domain
    second_derivative: Optional[float]
    interior: bool
    second_derivative_error: Optional[float] = None

    def as_dict(self):
        return self._asdict()


class MaximaReport(NamedTuple):
    m_f: float
    peaks: Tuple[Peak, ...]

    @property
    def locations(self) -> List[float]:
        return [p.location for p in self.peaks]

    def as_dict(self):
        return {'m_f': self.m_f, 'peaks': [p.as_dict() for p in self.peaks]}


class SelectionReport(NamedTuple):
    report: MaximaReport
    weights: Tuple[float, ...]

    def as_dict(self):
        described = self.report.as_dict()
        described['weights'] = list(self.weights)
        return described


def maximum_value(family: PotentialFamily, settings: Settings = DEFAULT) -> Tuple[float, float]:
    """``m(f) = max F`` and a point where it is attained.

    Unlike :func:`find_maxima` this accepts flat maxima.

    :rtype: tuple
    """
    peaks = family_peaks(family, settings)
    best = max(peaks, key=lambda p: p.value)
    return best.value, best.location


def find_maxima(family: PotentialFamily, tol: Optional[float] = None, settings: Settings = DEFAULT) -> MaximaReport:
    """Locate the maximising points of ``F``.

    :param PotentialFamily family:
        The potential.
    :param float tol:
        (Optional) Width the peak refinement stops at, the settings' ``peak_tol``
        by default.
    :rtype: MaximaReport
    """
    if tol is not None:
        if not tol > 0:
            raise ConfigError(f'peak tolerance must be positive, got {tol!r}')
        settings = settings.with_overrides(peak_tol=tol)
    m_f, maximizing = maximizing_peaks(family_peaks(family, settings))
    if any(p.flat for p in maximizing):
        raise UnsupportedMultiplicityError(None)
    if len(maximizing) > 2:
        raise UnsupportedMultiplicityError(len(maximizing))

    peaks = []
    for p in maximizing:
        if p.interior:
            curvature = second_derivative(family, p.location)
            peaks.append(Peak(p.location, p.value, curvature.value, True, curvature.error))
        else:
            peaks.append(Peak(p.location, p.value, None, False))
    logger.debug(f'maxima of {family.name}: {[p.location for p in peaks]}')
    return MaximaReport(m_f, tuple(peaks))


def calibration_residual(
    family: PotentialFamily,
    x: EventuallyConstantPoint,
    settings: Settings = DEFAULT,
) -> float:
    """How far ``u`` is from satisfying ``f(a x) + u(a x) - u(x) = F(a)``.

    The identity is checked on a grid of ``a`` and at the maximiser, where
    the left side must equal ``m(f)``.

    :param PotentialFamily family:
        The potential.
    :param EventuallyConstantPoint x:
        The point.
    :rtype: float
    """
    x.validate(family.domain)
    at_x = eval_u(family, x).value

    def bracket(a: float) -> float:
        ax = x.prepend(a)
        return eval_f(family, ax).value + eval_u(family, ax).value - at_x

    worst = 0.0
    for a in family.domain.grid(CALIBRATION_GRID):
        a = float(a)
        worst = max(worst, abs(bracket(a) - eval_F(family, a)))

    m_f, argmax = maximum_value(family, settings)
    worst = max(worst, abs(bracket(argmax) - m_f))
    return worst


def selection_weights(report: MaximaReport) -> SelectionReport:
    """Limiting weights of the equilibrium marginals on the maxima.

    One peak takes weight 1; two peaks take
    ``p_1 = sqrt|F''(a_2)| / (sqrt|F''(a_1)| + sqrt|F''(a_2)|)``.

    :param MaximaReport report:
        One or two interior peaks with ``F'' < 0``.
    :rtype: SelectionReport
    """
    if not 1 <= len(report.peaks) <= 2:
        raise UnsupportedMultiplicityError(len(report.peaks))
    for peak in report.peaks:
        if not peak.interior:
            raise EndpointPeakError(peak.location)
        if peak.second_derivative is None or not peak.second_derivative < 0:
            raise DegeneratePeakError(peak.location, peak.second_derivative)

    if len(report.peaks) == 1:
        return SelectionReport(report, (1.0,))
    first, second = (math.sqrt(-p.second_derivative) for p in report.peaks)
    total = first + second
    return SelectionReport(report, (second / total, first / total))


def _sweep_row(family, cylinder, beta, settings):
    log_mass = cylinder_mass(MarginalSpec(family, beta, settings=settings), cylinder)
    return beta, log_mass, spectral_data(family, beta, settings).pressure_over_beta


def check_betas(betas: Sequence[float]) -> List[float]:
    """Validate a positive, strictly increasing list of inverse temperatures."""
    betas = [float(b) for b in betas]
    if not betas:
        raise ConfigError('at least one beta is required')
    if not all(b > 0 and math.isfinite(b) for b in betas):
        raise ConfigError(f'betas must be positive and finite, got {betas!r}')
    if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
        raise ConfigError(f'betas must be strictly increasing, got {betas!r}')
    return betas


def beta_sweep(
    family: PotentialFamily,
    cylinder: Cylinder,
    betas: Sequence[float],
    settings: Settings = DEFAULT,
) -> Table:
    """Cylinder mass and pressure per unit ``beta`` along increasing ``beta``.

    Rows are computed on up to ``settings.threads`` worker threads and
    returned in the order of ``betas``.

    :rtype: Table
    """
    betas = check_betas(betas)
    cylinder.validate(family.domain)
    workers = max(1, min(settings.threads, len(betas)))
    logger.debug(f'beta sweep over {len(betas)} values on {workers} workers')
    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(executor.map(lambda b: _sweep_row(family, cylinder, b, settings), betas))
    return Table(SWEEP_COLUMNS, rows)


def window_log_masses(
    family: PotentialFamily,
    beta: float,
    report: MaximaReport,
    settings: Settings = DEFAULT,
) -> List[float]:
    """Log masses of windows of half-width ``min separation / 4`` around each peak.

    With a single peak the half-width is a quarter of the distance to the
    nearer end of the domain.
    """
    locations = report.locations
    if len(locations) > 1:
        epsilon = min(b - a for a, b in zip(locations, locations[1:])) / 4
    else:
        lo, hi = family.domain
        epsilon = min(locations[0] - lo, hi - locations[0]) / 4 or family.domain.width / 4
    spec = MarginalSpec(family, beta, settings=settings)
    masses = []
    for a in locations:
        box = [max(a - epsilon, family.domain.lo), min(a + epsilon, family.domain.hi)]
        masses.append(cylinder_mass(spec, Cylinder.from_pairs([box])))
    return masses
