"""Piecewise-linear velocity fields, Courant numbers and sign-change detection.

The velocity is represented by its samples at grid nodes (or at faces for
finite-volume grids) and is understood as the linear interpolant in between.
A sign change v_i * v_{i+1} < 0 hides an interior zero of the interpolant;
zeros with v' > 0 separate the domain into regions that do not exchange
information (expanding characteristics) and need dedicated handling in the
non-conservative schemes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Grid1D


@dataclass(frozen=True)
class VelocityField1D:
    """Velocity samples on a grid: nodal v_i, or face v_{i+1/2} (length I+1)."""

    samples: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        n = len(self.samples)
        expected = self.grid.ncells + 1  # nodes and faces both count I+1
        if self.grid.centering == "node" and n != expected:
            raise ValueError(f"expected {expected} nodal samples, got {n}")
        if self.grid.centering == "cell" and n != expected:
            raise ValueError(f"expected {expected} face samples, got {n}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("velocity samples must be finite")


@dataclass(frozen=True)
class ZeroCrossing:
    """Interior zero of the piecewise-linear velocity between two samples."""

    left_index: int
    location: float
    kind: str  # "expanding" (v changes - to +) or "converging" (+ to -)


def courant(v: VelocityField1D | np.ndarray, tau: float, h: float | None = None) -> np.ndarray:
    """Signed Courant numbers C = tau * v / h aligned with the samples."""
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    if isinstance(v, VelocityField1D):
        samples, h = v.samples, v.grid.h
    else:
        samples = np.asarray(v, dtype=float)
        if h is None:
            raise ValueError("h required when passing raw samples")
    return tau * samples / h


def cplus(C: np.ndarray) -> np.ndarray:
    return np.maximum(C, 0.0)


def cminus(C: np.ndarray) -> np.ndarray:
    return np.minimum(C, 0.0)


def find_zero_crossings(v: VelocityField1D) -> list[ZeroCrossing]:
    """Zeros of the interpolant strictly between samples.

    Only strict sign changes v_i * v_{i+1} < 0 count; a sample that is
    exactly zero is a nodal zero, not a crossing (the node decouples on its
    own since its Courant number vanishes).
    """
    s = v.samples
    x = v.grid.coords if v.grid.centering == "node" else v.grid.faces
    out = []
    for i in np.nonzero(s[:-1] * s[1:] < 0.0)[0]:
        # linear interpolation: v(xbar) = 0
        xbar = x[i] + v.grid.h * s[i] / (s[i] - s[i + 1])
        kind = "expanding" if s[i] < 0.0 else "converging"
        out.append(ZeroCrossing(int(i), float(xbar), kind))
    return out


def freeze_midtime(v: Callable, tn: float, tau: float, grid: Grid1D) -> VelocityField1D:
    """Freeze a time-dependent velocity at the step midpoint t^n + tau/2.

    For velocities that change sign, the zero catalog must be recomputed from
    the returned field for every step.
    """
    x = grid.coords if grid.centering == "node" else grid.faces
    t = tn + 0.5 * tau
    samples = np.asarray(v(x, t), dtype=float)
    if samples.shape != x.shape:
        samples = np.array([float(v(xi, t)) for xi in x])
    bad = ~np.isfinite(samples)
    if bad.any():
        raise ValueError(f"non-finite velocity at x={x[bad][0]!r}, t={t}")
    return VelocityField1D(samples, grid)
