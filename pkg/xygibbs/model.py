"""
This module implements the core developer interface for xygibbs.

The problem domain of the :class:`XYModel <XYModel>` class focuses almost
exclusively on the developer interface. xygibbs offloads the heavy lifting to
smaller peripheral modules and functions; an :class:`XYModel` binds one
potential and one inverse temperature to them and keeps the eigenvalue it
computed.
"""

import logging
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Union

from xygibbs import equilibrium, ldp, optimization, potential, quadrature, transfer
from xygibbs.equilibrium import PLAIN, TILDE, Cylinder, MarginalSpec
from xygibbs.exceptions import ConfigError
from xygibbs.families import family_from_config
from xygibbs.parser import load_config
from xygibbs.potential import EventuallyConstantPoint, PotentialFamily
from xygibbs.query import Table
from xygibbs.settings import Settings

logger = logging.getLogger(__name__)

CylinderLike = Union[Cylinder, Sequence[Sequence[float]]]


def _cylinder(cylinder: CylinderLike) -> Cylinder:
    if isinstance(cylinder, Cylinder):
        return cylinder
    return Cylinder.from_pairs(cylinder)


class XYModel:
    """Core developer interface for xygibbs."""

    def __init__(
        self,
        family: Union[PotentialFamily, Dict[str, Any]],
        beta: float = 1.0,
        settings: Optional[Settings] = None,
    ):
        """Construct a :class:`XYModel <XYModel>`.

        :param family:
            A :class:`PotentialFamily` or its JSON object, e.g.
            ``{"family": "example1"}``.
        :param float beta:
            (Optional) Inverse temperature, ``beta >= 0``.
        :param Settings settings:
            (Optional) Tolerances and grid sizes.
        """
        self.settings = settings or Settings()
        if isinstance(family, dict):
            family = family_from_config(family, tol=self.settings.family_tol)
        if not beta >= 0:
            raise ConfigError(f'beta must be nonnegative, got {beta!r}')
        self.family = family
        self.beta = float(beta)

        self._eigendata: Optional[transfer.EigenData] = None
        self._marginal: Optional[MarginalSpec] = None

    @classmethod
    def from_config_file(cls, path: str, beta: Optional[float] = None, settings: Optional[Settings] = None) -> "XYModel":
        """Build a model from a JSON config file.

        A ``beta`` field in the file is used unless ``beta`` is given.
        """
        config = load_config(path)
        if beta is None:
            beta = config.get("beta", 1.0)
        return cls(config, beta, settings)

    def with_beta(self, beta: float) -> "XYModel":
        """The same potential at another inverse temperature."""
        return XYModel(self.family, beta, self.settings)

    def __repr__(self):
        return f'<xygibbs.model.XYModel object: family={self.family.name} beta={self.beta!r}>'

    @property
    def eigendata(self) -> transfer.EigenData:
        if self._eigendata:
            return self._eigendata
        self._eigendata = transfer.eigendata(self.family, self.beta, self.settings)
        return self._eigendata

    @property
    def log_lambda(self) -> float:
        return self.eigendata.log_lambda

    @property
    def spectral_data(self) -> equilibrium.SpectralData:
        return equilibrium.spectral_data(self.family, self.beta, self.settings)

    @property
    def marginal(self) -> MarginalSpec:
        """The equilibrium marginal, with its sampling table cached."""
        if self._marginal:
            return self._marginal
        self._marginal = MarginalSpec(self.family, self.beta, TILDE, settings=self.settings)
        return self._marginal

    def F(self, a: float) -> float:
        return potential.eval_F(self.family, a)

    def f(self, x: EventuallyConstantPoint) -> float:
        return potential.eval_f(self.family, x).value

    def u(self, x: EventuallyConstantPoint) -> float:
        return potential.eval_u(self.family, x).value

    def log_h(self, x: EventuallyConstantPoint) -> float:
        return transfer.eval_h(self.family, self.beta, x)

    def hypothesis(self, anchor: Optional[EventuallyConstantPoint] = None) -> potential.HypothesisCheck:
        anchor = anchor or EventuallyConstantPoint.constant(0.5 * (self.family.domain.lo + self.family.domain.hi))
        return potential.check_prop22(self.family, anchor)

    def density(self, a: float) -> float:
        return transfer.normalized_density(self.family, self.beta, a, self.settings)

    def apply_L(self, phi: transfer.TestFunction, x: EventuallyConstantPoint) -> float:
        return transfer.apply_L(self.family, self.beta, phi, x, self.settings)

    def normalized_potential(self, x: EventuallyConstantPoint) -> float:
        return transfer.normalized_potential(self.family, self.beta, x, self.settings)

    def eigen_residual(self, x: EventuallyConstantPoint) -> float:
        return transfer.eigen_residual(self.family, self.beta, x, self.settings)

    def normalization_residual(self, x: EventuallyConstantPoint) -> float:
        return transfer.normalization_residual(self.family, self.beta, x, self.settings)

    def dual_fixed_point_residual(self, factors: Iterable[Callable]) -> float:
        return transfer.dual_fixed_point_residual(self.family, self.beta, factors, self.settings)

    def plain_marginal(self, n: int) -> MarginalSpec:
        return MarginalSpec(self.family, self.beta, PLAIN, n, self.settings)

    def sample(self, count: int, seed: Optional[int] = None) -> List[float]:
        return equilibrium.sample_marginal(self.marginal, seed, count).tolist()

    def cylinder_mass(self, cylinder: CylinderLike) -> float:
        """Log mass of a cylinder under the equilibrium measure."""
        return equilibrium.cylinder_mass(self.marginal, _cylinder(cylinder))

    def marginal_relation_residual(self, j: int, points: Iterable[float]) -> float:
        return equilibrium.marginal_relation_residual(self.family, self.beta, j, points, self.settings)

    @property
    def entropy(self) -> float:
        return equilibrium.entropy(self.family, self.beta, self.settings)

    @property
    def mean_f(self) -> float:
        return equilibrium.mean_f(self.family, self.beta, self.settings)

    @property
    def variational_residual(self) -> float:
        return equilibrium.variational_residual(self.family, self.beta, self.settings)

    @property
    def m_f(self) -> float:
        return optimization.maximum_value(self.family, self.settings)[0]

    def maxima(self) -> optimization.MaximaReport:
        return optimization.find_maxima(self.family, settings=self.settings)

    def selection(self) -> optimization.SelectionReport:
        return optimization.selection_weights(self.maxima())

    def calibration_residual(self, x: EventuallyConstantPoint) -> float:
        return optimization.calibration_residual(self.family, x, self.settings)

    def beta_sweep(self, cylinder: CylinderLike, betas: Sequence[float]) -> Table:
        return optimization.beta_sweep(self.family, _cylinder(cylinder), betas, self.settings)

    def laplace_log_partition(self) -> float:
        return quadrature.laplace_log_partition(self.family, self.beta, self.settings)

    def rate_on_cylinder(self, cylinder: CylinderLike) -> ldp.RateResult:
        return ldp.rate_on_cylinder(self.family, _cylinder(cylinder), self.settings)

    def rate_at_point(self, x: EventuallyConstantPoint, terms: Optional[int] = None) -> ldp.RatePoint:
        return ldp.rate_at_point(self.family, x, terms, self.settings)

    def ldp_residual(self, cylinder: CylinderLike, betas: Sequence[float]) -> Table:
        return ldp.ldp_residual(self.family, _cylinder(cylinder), betas, self.settings)
