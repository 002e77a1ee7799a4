"""
This module contains the large-deviation rate function of the equilibrium measures.

For a product-type potential the rate is ``I(x) = sum_j (m(f) - F(x_j))``,
so its infimum over a cylinder splits box by box into ``m(f) - sup_A F``.
"""

import logging
import math
from typing import NamedTuple, Optional, Sequence, Tuple

from xygibbs.equilibrium import Cylinder, MarginalSpec, cylinder_mass
from xygibbs.exceptions import ConfigError
from xygibbs.optimization import check_betas, maximum_value
from xygibbs.potential import EventuallyConstantPoint, PotentialFamily, eval_F, eval_f, eval_u
from xygibbs.quadrature import locate_peaks, matching_tolerance
from xygibbs.query import Table
from xygibbs.settings import DEFAULT, Settings

logger = logging.getLogger(__name__)

LDP_COLUMNS = ["beta", "log_mass_over_beta", "neg_inf_I", "residual"]


class BoxRate(NamedTuple):
    sup_F: float
    contribution: float
    argmax: float


class RateResult(NamedTuple):
    inf_I: float
    per_box: Tuple[BoxRate, ...]

    def as_dict(self):
        return {'inf_I': self.inf_I, 'per_box': [b._asdict() for b in self.per_box]}


class RatePoint(NamedTuple):
    """The rate at a point; ``value`` is ``None`` when ``infinite`` is set."""
    value: Optional[float]
    infinite: bool
    terms: int

    def as_dict(self):
        return self._asdict()


def _deficit(m_f: float, value: float) -> float:
    # m(f) - F, snapped to 0 on the peak set
    gap = m_f - value
    return 0.0 if gap <= matching_tolerance(m_f) else gap


def rate_on_cylinder(family: PotentialFamily, cylinder: Cylinder, settings: Settings = DEFAULT) -> RateResult:
    """``inf_D I = sum_j (m(f) - sup_{A_j} F)``.

    Each supremum is found like the global maximum, by a grid scan of the
    box refined by golden section.

    :param PotentialFamily family:
        The potential.
    :param Cylinder cylinder:
        Boxes inside the domain.
    :rtype: RateResult
    """
    cylinder.validate(family.domain)
    m_f, _ = maximum_value(family, settings)
    per_box = []
    for box in cylinder:
        peaks = locate_peaks(
            family.summed_array, box, settings.box_grid_points, settings.peak_tol, family.summed, family.d1)
        best = max(peaks, key=lambda p: p.value)
        per_box.append(BoxRate(best.value, _deficit(m_f, best.value), best.location))
    return RateResult(math.fsum(b.contribution for b in per_box), tuple(per_box))


def ldp_residual(
    family: PotentialFamily,
    cylinder: Cylinder,
    betas: Sequence[float],
    settings: Settings = DEFAULT,
) -> Table:
    """Compare ``(1/beta) log mu~_beta(D)`` with ``-inf_D I`` along increasing ``beta``.

    :rtype: Table
    """
    betas = check_betas(betas)
    rate = rate_on_cylinder(family, cylinder, settings)
    rows = []
    for beta in betas:
        scaled = cylinder_mass(MarginalSpec(family, beta, settings=settings), cylinder) / beta
        rows.append((beta, scaled, -rate.inf_I, abs(scaled + rate.inf_I)))
    logger.debug(f'ldp residuals: {[row[-1] for row in rows]}')
    return Table(LDP_COLUMNS, rows)


def _check_terms(x: EventuallyConstantPoint, terms: int):
    if terms < x.depth:
        raise ConfigError(f'terms ({terms}) must cover the prefix of length {x.depth}')


def rate_at_point(
    family: PotentialFamily,
    x: EventuallyConstantPoint,
    terms: Optional[int] = None,
    settings: Settings = DEFAULT,
) -> RatePoint:
    """``I(x) = sum_j (m(f) - F(x_j))`` at an eventually constant point.

    The sum is infinite exactly when the tail value is not a maximiser of
    ``F``; otherwise every tail term vanishes and the first ``terms``
    coordinates carry the whole sum.

    :param PotentialFamily family:
        The potential.
    :param EventuallyConstantPoint x:
        The point.
    :param int terms:
        (Optional) Number of coordinates summed, at least the prefix length.
    :rtype: RatePoint
    """
    terms = x.depth if terms is None else terms
    _check_terms(x, terms)
    x.validate(family.domain)
    m_f, _ = maximum_value(family, settings)
    if _deficit(m_f, eval_F(family, x.tail_value)) > 0:
        return RatePoint(None, True, terms)
    value = math.fsum(_deficit(m_f, eval_F(family, x.coordinate(j))) for j in range(1, terms + 1))
    return RatePoint(value, False, terms)


def rate_via_subaction(
    family: PotentialFamily,
    x: EventuallyConstantPoint,
    terms: Optional[int] = None,
    settings: Settings = DEFAULT,
) -> RatePoint:
    """The rate from ``sum_j [u(s^j x) - u(s^(j-1) x) - f(s^(j-1) x) + m(f)]``.

    :rtype: RatePoint
    """
    terms = x.depth if terms is None else terms
    _check_terms(x, terms)
    x.validate(family.domain)
    m_f, _ = maximum_value(family, settings)
    if _deficit(m_f, eval_F(family, x.tail_value)) > 0:
        return RatePoint(None, True, terms)

    contributions = []
    point = x
    at_point = eval_u(family, point).value
    for _ in range(terms):
        shifted = point.shift()
        at_shifted = eval_u(family, shifted).value
        gap = at_shifted - at_point - eval_f(family, point).value + m_f
        contributions.append(0.0 if abs(gap) <= matching_tolerance(m_f) else gap)
        point, at_point = shifted, at_shifted
    return RatePoint(math.fsum(contributions), False, terms)
