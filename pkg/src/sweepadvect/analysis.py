"""Error norms, convergence rates, mass/extremum tracking and the empirical
von Neumann amplification factor of the second-order scheme."""

from __future__ import annotations

import numpy as np

from .grid import Trajectory


def _weights(traj: Trajectory) -> tuple[float, float]:
    """(cell weight, tau): h in 1D, h^2 on the square tensor grid."""
    tau = traj.tgrid.tau
    if isinstance(traj.grid, tuple):
        gx, gy = traj.grid
        return gx.h * gy.h, tau
    return traj.grid.h, tau


def global_error(traj: Trajectory, exact) -> float:
    """Discrete space-time L1 distance to an exact solution:
    h * tau * sum_{i,n} |phi_i^n - phi(x_i, t^n)| (h^2 in 2D)."""
    w, tau = _weights(traj)
    total = 0.0
    if isinstance(traj.grid, tuple):
        gx, gy = traj.grid
        X, Y = np.meshgrid(gx.coords, gy.coords, indexing="ij")
        for n, field in enumerate(traj):
            total += float(np.sum(np.abs(field - exact(X, Y, traj.tgrid.t(n)))))
    else:
        x = traj.grid.coords
        for n, field in enumerate(traj):
            total += float(np.sum(np.abs(field - exact(x, traj.tgrid.t(n)))))
    return w * tau * total


def final_error(traj: Trajectory, exact, T: float | None = None) -> float:
    """Discrete L1 distance at the final time: h * sum_i |phi_i^N - phi(x_i, T)|."""
    w, _ = _weights(traj)
    T = traj.tgrid.T if T is None else T
    if isinstance(traj.grid, tuple):
        gx, gy = traj.grid
        X, Y = np.meshgrid(gx.coords, gy.coords, indexing="ij")
        return w * float(np.sum(np.abs(traj.final - exact(X, Y, T))))
    return w * float(np.sum(np.abs(traj.final - exact(traj.grid.coords, T))))


def eoc(e_coarse: float, e_fine: float) -> float:
    """Experimental order of convergence under refinement by a factor 2."""
    if e_coarse <= 0.0 or e_fine <= 0.0:
        raise ValueError("EOC needs two positive errors")
    return float(np.log2(e_coarse / e_fine))


def min_series(traj: Trajectory) -> np.ndarray:
    return np.array([float(np.min(f)) for f in traj])


def mass_series(traj: Trajectory) -> np.ndarray:
    """h-weighted (h^2 in 2D) sum of values per time level."""
    w, _ = _weights(traj)
    return np.array([w * float(np.sum(f)) for f in traj])


# ---------------------------------------------------------------------------
# von Neumann symbol of the constant-coefficient second-order scheme
# ---------------------------------------------------------------------------


def stencil_coefficients(C: float, alpha: float) -> tuple[dict[int, float], dict[int, float]]:
    """Implicit and explicit stencil weights of the second-order update for
    constant Courant number C, as {offset: coefficient} maps.

    The update reads  sum_k imp[k] phi_{i+k}^{n+1} = sum_k exp[k] phi_{i+k}^n.
    """
    cp, cm = max(C, 0.0), min(C, 0.0)
    a = alpha
    imp = {
        -2: 0.5 * a * cp,
        -1: -0.5 * (1.0 + 2.0 * a) * cp,
        0: 1.0 + 0.5 * (1.0 + a) * (cp - cm),
        1: 0.5 * (1.0 + 2.0 * a) * cm,
        2: -0.5 * a * cm,
    }
    # rhs: phi_i^n - (cp/2) g^-_i - (cm/2) g^+_i with the blended differences
    exp = {
        -1: 0.5 * cp * a - 0.5 * cm * (a - 1.0),
        0: 1.0 - 0.5 * cp * (2.0 * a - 1.0) - 0.5 * cm * (1.0 - 2.0 * a),
        1: -0.5 * cp * (1.0 - a) - 0.5 * cm * a,
    }
    return imp, exp


def amplification_factor(C: float, alpha: float, theta: float) -> float:
    """|g| for the Fourier mode phi_j^n = g^n e^{i j theta} under the
    constant-coefficient second-order scheme.  |g| <= 1 for every C whenever
    alpha >= 0; negative alpha admits growing modes."""
    imp, exp = stencil_coefficients(C, alpha)
    lhs = sum(c * np.exp(1j * k * theta) for k, c in imp.items())
    rhs = sum(c * np.exp(1j * k * theta) for k, c in exp.items())
    if lhs == 0.0:
        raise ZeroDivisionError(f"implicit symbol vanished at C={C}, alpha={alpha}, theta={theta}")
    return float(abs(rhs / lhs))
