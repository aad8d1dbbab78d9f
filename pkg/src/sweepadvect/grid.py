"""Uniform 1D/2D grids, time grids and solution containers.

Grids are either node-centered (I+1 points x_i = origin + i*h, i = 0..I) or
cell-centered (I control volumes with centers x_i = origin + i*h - h/2 and
faces at origin + i*h, i = 0..I).  All arithmetic is binary64.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D grid on (origin, origin + length)."""

    origin: float
    length: float
    ncells: int
    centering: str = "node"  # "node" or "cell"

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError(f"domain length must be positive, got {self.length}")
        if self.ncells < 2:
            raise ValueError(f"need at least 2 cells, got {self.ncells}")
        if self.centering not in ("node", "cell"):
            raise ValueError(f"unknown centering {self.centering!r}")

    @property
    def h(self) -> float:
        return self.length / self.ncells

    @property
    def npoints(self) -> int:
        """Number of unknowns: I+1 node-centered, I cell-centered."""
        return self.ncells + 1 if self.centering == "node" else self.ncells

    @property
    def coords(self) -> np.ndarray:
        h = self.h
        if self.centering == "node":
            return self.origin + h * np.arange(self.ncells + 1)
        return self.origin + h * np.arange(1, self.ncells + 1) - 0.5 * h

    @property
    def faces(self) -> np.ndarray:
        """Face coordinates origin + i*h, i = 0..I (cell-centered grids)."""
        return self.origin + self.h * np.arange(self.ncells + 1)


def make_grid(origin: float, length: float, ncells: int, centering: str = "node") -> Grid1D:
    return Grid1D(origin, length, ncells, centering)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t^n = n*tau on [0, T] with tau = T/N."""

    T: float
    N: int

    def __post_init__(self):
        if self.T <= 0.0 or self.N < 1:
            raise ValueError(f"need T > 0 and N >= 1, got T={self.T}, N={self.N}")

    @property
    def tau(self) -> float:
        return self.T / self.N

    @property
    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.N + 1)

    def t(self, n: int) -> float:
        return n * self.tau

    def midpoint(self, n: int) -> float:
        """t^{n+1/2} = t^n + tau/2."""
        return (n + 0.5) * self.tau


def sample(f: Callable, grid: Grid1D) -> np.ndarray:
    """Evaluate f at every grid coordinate of a 1D grid.

    Raises if any value is non-finite, reporting the offending coordinate.
    """
    x = grid.coords
    values = np.asarray(f(x), dtype=float)
    if values.shape != x.shape:
        # f not vectorized; fall back to pointwise evaluation
        values = np.array([float(f(xi)) for xi in x])
    bad = ~np.isfinite(values)
    if bad.any():
        raise ValueError(f"non-finite sample at x={x[bad][0]!r}")
    return values


def sample2d(f: Callable, gx: Grid1D, gy: Grid1D) -> np.ndarray:
    """Evaluate f(x, y) on the tensor grid; result indexed [i, j] ~ (x_i, y_j)."""
    X, Y = np.meshgrid(gx.coords, gy.coords, indexing="ij")
    values = np.asarray(f(X, Y), dtype=float)
    if values.shape != X.shape:
        values = np.broadcast_to(values, X.shape).astype(float)
    bad = ~np.isfinite(values)
    if bad.any():
        raise ValueError(f"non-finite sample at (x, y)=({X[bad][0]}, {Y[bad][0]})")
    return values


@dataclass
class Trajectory:
    """Solution fields at time levels 0..N, plus the grids they live on."""

    grid: Grid1D | tuple[Grid1D, Grid1D]
    tgrid: TimeGrid
    fields: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.fields)

    def __getitem__(self, n: int) -> np.ndarray:
        return self.fields[n]

    def __iter__(self):
        return iter(self.fields)

    @property
    def final(self) -> np.ndarray:
        return self.fields[-1]

    def append(self, values: np.ndarray) -> None:
        self.fields.append(values)

    def subsample(self, stride: int, tgrid: TimeGrid) -> "Trajectory":
        """Keep every stride-th level (used when a run is computed with
        refined internal steps but reported on a coarser time grid)."""
        return Trajectory(self.grid, tgrid, self.fields[::stride])
