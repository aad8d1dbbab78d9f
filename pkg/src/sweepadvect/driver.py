"""Scheme selection and the dispatching time-march entry point."""

from __future__ import annotations

from dataclasses import dataclass, field

from .conservative import solve_fv
from .grid import Grid1D, TimeGrid, Trajectory
from .nonconservative import AlphaPolicy
from .nonconservative import solve as solve_nc


@dataclass
class SchemeConfig:
    """Which scheme runs: family ("nc" or "fv"), order (1 or 2), and the
    blending-weight policy.  ``freeze`` picks the velocity-freezing instant
    for split 2D steps; ``validate_alpha`` may be dropped by internal callers
    that deliberately leave [0, 1] (the descent experiment)."""

    family: str = "nc"
    order: int = 2
    alpha: AlphaPolicy = field(default_factory=lambda: AlphaPolicy.fixed(0.5))
    validate_alpha: bool = True
    freeze: str = "step_midpoint"  # or "substep_midpoint"

    def __post_init__(self):
        if self.family not in ("nc", "fv"):
            raise ValueError(f"unknown scheme family {self.family!r}")
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if self.freeze not in ("step_midpoint", "substep_midpoint"):
            raise ValueError(f"unknown freeze policy {self.freeze!r}")

    @staticmethod
    def from_name(name: str, alpha: AlphaPolicy | None = None) -> "SchemeConfig":
        """Parse compact scheme names: nc1, nc2, fv1, fv2."""
        if name not in ("nc1", "nc2", "fv1", "fv2"):
            raise ValueError(f"unknown scheme {name!r}")
        cfg = SchemeConfig(family=name[:2], order=int(name[2]))
        if alpha is not None:
            cfg.alpha = alpha
        return cfg


def solve(problem, grid: Grid1D, tgrid: TimeGrid, config: SchemeConfig) -> Trajectory:
    """Run the configured 1D scheme over the whole time grid."""
    if config.family == "fv":
        return solve_fv(problem, grid, tgrid, config)
    return solve_nc(problem, grid, tgrid, config)
