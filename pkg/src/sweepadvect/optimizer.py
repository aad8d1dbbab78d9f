"""Per-node, per-step tuning of the blending weight by one gradient step.

The second-order scheme admits an independent weight alpha_i^n at every
interior node and time level.  Starting from alpha = 0.5 everywhere, the
negative-undershoot loss

    J = h tau sum_{i,n} min(0, phi_i^n)^2

is differentiated exactly with respect to all weights by reverse-mode
traversal of the sweep recurrences (steps in reverse time, substitutions in
reverse order), and a single descent step alpha -> alpha - eta grad J is
taken.  Entries at the boundary nodes and at the first/last time levels stay
fixed at 0.5 and carry no gradient.  A central finite-difference oracle
guards the adjoint in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import final_error
from .grid import Grid1D, TimeGrid, Trajectory
from .nonconservative import AlphaPolicy, _effective_alpha, _pair_mask
from .nonconservative import solve as solve_nc
from .velocity import courant, freeze_midtime


@dataclass
class AlphaField:
    """Blending weights, one slice per time level; the step that produces
    level n consumes slice n.  Slice 0 exists only for shape regularity."""

    values: np.ndarray  # (N+1, M)

    @staticmethod
    def initial(grid: Grid1D, tgrid: TimeGrid, value: float = 0.5) -> "AlphaField":
        return AlphaField(np.full((tgrid.N + 1, grid.npoints), float(value)))

    @property
    def core(self) -> np.ndarray:
        """The optimized region: interior nodes, time levels 1..N-1."""
        return self.values[1:-1, 1:-1]

    def clamped(self) -> "AlphaField":
        return AlphaField(np.clip(self.values, 0.0, 1.0))


@dataclass
class OptimizationReport:
    J_before: float
    J_after: float
    E_before: float
    E_after: float
    eta: float
    J_after_clamped: float
    E_after_clamped: float


def loss_J(traj: Trajectory, h: float, tau: float) -> float:
    """h tau sum over all nodes and levels of min(0, phi)^2; zero exactly
    when the whole trajectory is nonnegative."""
    total = 0.0
    for f in traj:
        neg = np.minimum(0.0, f)
        total += float(np.dot(neg, neg))
    return h * tau * total


def descent_step(alpha: AlphaField, grad: np.ndarray, eta: float) -> AlphaField:
    if grad.shape != alpha.values.shape:
        raise ValueError(f"gradient shape {grad.shape} != alpha shape {alpha.values.shape}")
    return AlphaField(alpha.values - eta * grad)


def _field_config(alpha: AlphaField):
    from .driver import SchemeConfig

    return SchemeConfig(family="nc", order=2, alpha=AlphaPolicy.field(alpha.values),
                        validate_alpha=False)


def _step_courant(problem, grid: Grid1D, tgrid: TimeGrid) -> list[np.ndarray]:
    if problem.velocity_time_dependent:
        return [courant(freeze_midtime(problem.velocity, tgrid.t(n), tgrid.tau, grid), tgrid.tau)
                for n in range(tgrid.N)]
    C = courant(freeze_midtime(problem.velocity, 0.0, tgrid.tau, grid), tgrid.tau)
    return [C] * tgrid.N


def _free_alpha_mask(C: np.ndarray) -> np.ndarray:
    """Entries of one alpha slice that actually enter the update: interior
    nodes minus the ones overridden by the near-boundary reductions."""
    M = len(C)
    free = np.zeros(M, dtype=bool)
    free[1:-1] = True
    if C[1] > 0.0:
        free[1] = False
    if C[M - 2] < 0.0:
        free[M - 2] = False
    return free


def _reverse_step(pn: np.ndarray, out: np.ndarray, C: np.ndarray, alpha_slice: np.ndarray,
                  bar_out: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pull the adjoint of one step back through the two substitution passes.

    Returns (bar_pn, bar_alpha): sensitivities of whatever bar_out encodes
    with respect to the previous level and to this step's alpha slice.  The
    sweeps are reversed in exact reverse execution order: backward pass
    first (ascending i), then the forward pass (descending i), then the
    decoupled pairs and identity nodes.
    """
    M = len(pn)
    a = _effective_alpha(C[None, :], alpha_slice[None, :])[0]
    final0 = np.zeros(M, dtype=bool)
    if C[0] > 0.0:
        final0[0] = True
    if C[-1] < 0.0:
        final0[-1] = True
    pairs = np.nonzero(_pair_mask(C[None, :], order=2)[0])[0]
    for j in pairs:
        final0[j] = final0[j + 1] = True
    fwd = (C > 0.0) & ~final0
    bwd = (C < 0.0) & ~final0
    ident = (C == 0.0) & ~final0

    b = np.array(bar_out, dtype=float, copy=True)
    bar_pn = np.zeros(M)
    bar_a = np.zeros(M)

    for i in range(M):  # reverse of the backward pass
        if not bwd[i]:
            continue
        c = C[i]
        ai = a[i]
        D = 2.0 - (1.0 + ai) * c
        w = b[i] / D  # adjoint of the numerator
        bar_pn[i] += 2.0 * w
        b[i + 1] += -(1.0 + 2.0 * ai) * c * w
        i2 = min(i + 2, M - 1)
        if ai != 0.0:
            b[i2] += ai * c * w
        g = -c * w  # adjoint of the blended difference g^+_i
        bar_pn[i + 1] += ai * g
        bar_pn[i] += (1.0 - 2.0 * ai) * g
        if ai != 1.0:
            bar_pn[i - 1] += -(1.0 - ai) * g
        dgp = (pn[i + 1] - pn[i]) - (pn[i] - pn[i - 1]) if 0 < i else 0.0
        dnum = -2.0 * c * out[i + 1] + c * out[i2] - c * dgp
        bar_a[i] += b[i] * (dnum + c * out[i]) / D

    for i in range(M - 1, -1, -1):  # reverse of the forward pass
        if not fwd[i]:
            continue
        c = C[i]
        ai = a[i]
        D = 2.0 + (1.0 + ai) * c
        w = b[i] / D
        bar_pn[i] += 2.0 * w
        b[i - 1] += (1.0 + 2.0 * ai) * c * w
        i2 = max(i - 2, 0)
        if ai != 0.0:
            b[i2] += -ai * c * w
        g = -c * w  # adjoint of g^-_i
        bar_pn[i - 1] += -ai * g
        bar_pn[i] += (2.0 * ai - 1.0) * g
        if ai != 1.0:
            bar_pn[i + 1] += (1.0 - ai) * g
        dgm = (pn[i] - pn[i - 1]) - (pn[i + 1] - pn[i]) if i < M - 1 else 0.0
        dnum = 2.0 * c * out[i - 1] - c * out[i2] - c * dgm
        bar_a[i] += b[i] * (dnum - c * out[i]) / D

    bar_pn[ident] += b[ident]

    for j in pairs:
        cl = C[j] - C[j + 1]
        theta = C[j] / cl
        den = 1.0 - cl
        bar_pn[j] += (b[j] * (1.0 - cl * (1.0 - theta)) + b[j + 1] * (-cl * (1.0 - theta))) / den
        bar_pn[j + 1] += (b[j] * (-cl * theta) + b[j + 1] * (1.0 - cl * theta)) / den
    return bar_pn, bar_a


def grad_J(problem, grid: Grid1D, tgrid: TimeGrid, alpha: AlphaField) -> np.ndarray:
    """Exact gradient of J with respect to every alpha entry, by reverse-mode
    differentiation of the implemented recurrences.  Entries outside the
    optimized region (and ones overridden near the boundary) come back zero.
    """
    if alpha.values.shape != (tgrid.N + 1, grid.npoints):
        raise ValueError(f"alpha shape {alpha.values.shape} does not match "
                         f"({tgrid.N + 1}, {grid.npoints})")
    traj = solve_nc(problem, grid, tgrid, _field_config(alpha))
    h, tau = grid.h, tgrid.tau
    bars = [2.0 * h * tau * np.minimum(0.0, f) for f in traj]
    Cs = _step_courant(problem, grid, tgrid)
    grad = np.zeros_like(alpha.values)
    for n in range(tgrid.N - 1, -1, -1):
        bar_pn, bar_a = _reverse_step(traj[n], traj[n + 1], Cs[n], alpha.values[n + 1], bars[n + 1])
        bars[n] = bars[n] + bar_pn
        if 1 <= n + 1 <= tgrid.N - 1:  # fixed first/last slices get no gradient
            grad[n + 1] = np.where(_free_alpha_mask(Cs[n]), bar_a, 0.0)
    return grad


def optimize_once(problem, grid: Grid1D, tgrid: TimeGrid, eta: float) -> OptimizationReport:
    """Solve with alpha = 0.5, take one descent step on J, solve again.

    The re-solve uses the raw (unclamped) weights; a clamped variant is
    reported alongside since large learning rates can push entries slightly
    outside [0, 1], where the scheme is still stable for alpha >= 0.
    """
    if problem.exact_final is None:
        raise ValueError(f"problem {problem.name} has no final-time reference solution")
    exact_final = lambda x, t: problem.exact_final(x)
    h, tau = grid.h, tgrid.tau

    alpha0 = AlphaField.initial(grid, tgrid)
    traj_b = solve_nc(problem, grid, tgrid, _field_config(alpha0))
    J_b = loss_J(traj_b, h, tau)
    E_b = final_error(traj_b, exact_final)

    grad = grad_J(problem, grid, tgrid, alpha0)
    alpha1 = descent_step(alpha0, grad, eta)
    traj_a = solve_nc(problem, grid, tgrid, _field_config(alpha1))
    J_a = loss_J(traj_a, h, tau)
    E_a = final_error(traj_a, exact_final)

    traj_c = solve_nc(problem, grid, tgrid, _field_config(alpha1.clamped()))
    J_c = loss_J(traj_c, h, tau)
    E_c = final_error(traj_c, exact_final)
    return OptimizationReport(J_b, J_a, E_b, E_a, eta, J_c, E_c)
