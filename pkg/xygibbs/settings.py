"""Tolerances and grid sizes shared by every operation."""
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict

from xygibbs.helpers import thread_cap


@dataclass(frozen=True)
class Settings:
    """Resolved numerical settings.

    A single instance is shared by everything a run touches, so that a report
    can echo exactly what was used.
    """
    # absolute accuracy of family evaluators
    family_tol: float = 1e-12
    # relative accuracy of quadratures on peak-shifted integrands
    quad_tol: float = 1e-10
    # golden-section bracket width
    peak_tol: float = 1e-12
    grid_points: int = 4097
    box_grid_points: int = 257
    cdf_nodes: int = 4096
    max_panels: int = 4000
    threads: int = field(default_factory=thread_cap)

    def with_overrides(self, **overrides: Any) -> "Settings":
        """Return a copy with the non-``None`` overrides applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


DEFAULT = Settings()
