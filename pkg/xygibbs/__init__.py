# flake8: noqa: F401
# noreorder
"""
xygibbs: thermodynamic formalism for product-type potentials on the XY model.
"""
__title__ = "xygibbs"
__license__ = "MIT License"

from xygibbs.version import __version__
from xygibbs.settings import Settings
from xygibbs.potential import (
    Estimate,
    EventuallyConstantPoint,
    HypothesisCheck,
    Interval,
    PotentialFamily,
    check_prop22,
    eval_F,
    eval_f,
    eval_u,
)
from xygibbs.families import (
    Example1Family,
    PolylogFamily,
    SingleCoordinateFamily,
    ZeroFamily,
    family_from_config,
)
from xygibbs.query import Table
from xygibbs.quadrature import integrate, laplace_approx, laplace_log_partition, log_partition
from xygibbs.transfer import (
    EigenData,
    TestFunction,
    apply_L,
    dual_fixed_point_residual,
    eigen_residual,
    eval_h,
    normalization_residual,
    normalized_density,
    normalized_potential,
)
from xygibbs.equilibrium import (
    Cylinder,
    MarginalSpec,
    SpectralData,
    cylinder_mass,
    entropy,
    marginal_relation_residual,
    mean_f,
    sample_marginal,
    spectral_data,
    variational_residual,
)
from xygibbs.optimization import (
    MaximaReport,
    SelectionReport,
    beta_sweep,
    calibration_residual,
    find_maxima,
    maximum_value,
    selection_weights,
)
from xygibbs.ldp import ldp_residual, rate_at_point, rate_on_cylinder, rate_via_subaction
from xygibbs.model import XYModel
from xygibbs.info import info
