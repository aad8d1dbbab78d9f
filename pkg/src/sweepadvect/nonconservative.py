"""Semi-implicit schemes for the non-conservative advection equation
phi_t + v(x) phi_x = 0 on a node-centered grid.

Both the first-order fully implicit upwind scheme and the second-order
parametric family are solved *exactly* by one forward and one backward
substitution.  The implicit stencil of every node points upwind, so a node
with C_i > 0 receives its final value in the forward pass (its backward
update is the identity) and may be read as t^{n+1} data by later nodes of
the same pass; nodes with C_i < 0 are finalized symmetrically in the
backward pass.  The only couplings violating this ordering occur around an
interior velocity zero with v' > 0 (expanding characteristics); those node
pairs are decoupled beforehand by explicit updates built on the interpolated
value at the stagnation point, where the solution is constant in time.

The second-order family blends one-sided differences with a weight
``alpha``: alpha = 1 is fully upwind, alpha = 0.5 central, alpha = 0
downwind.  The update of node i for C_i > 0 reads

    phi_i^{n+1} = [2 phi_i^n + (1+2a) C_i phi_{i-1}^{n+1} - a C_i phi_{i-2}^{n+1}
                   - C_i g_i^n] / (2 + (1+a) C_i),

with g_i^n = a (phi_i^n - phi_{i-1}^n) + (1-a)(phi_{i+1}^n - phi_i^n), and
mirrored for C_i < 0.  The scheme is von Neumann stable for any alpha >= 0
and any Courant number.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import Grid1D, TimeGrid, Trajectory, sample
from .velocity import VelocityField1D, ZeroCrossing, courant, find_zero_crossings, freeze_midtime


@dataclass(frozen=True)
class BoundaryData1D:
    """Time-dependent Dirichlet data, consulted only at inflow ends."""

    left: Callable[[float], float]
    right: Callable[[float], float]

    @staticmethod
    def constant(cl: float, cr: float | None = None) -> "BoundaryData1D":
        cr = cl if cr is None else cr
        return BoundaryData1D(lambda t: cl, lambda t: cr)


class AlphaPolicy:
    """How the blending parameter is chosen: a fixed value, the Courant-based
    rule alpha_i = (2 + |C_i|)/6, or a caller-provided per-node-per-step field.

    The Courant rule is capped at 1 so that it always satisfies the [0, 1]
    contract of the step functions; the cap only engages for |C| > 4.
    """

    def __init__(self, mode: str, value: float | None = None, field: np.ndarray | None = None):
        if mode not in ("fixed", "courant", "field"):
            raise ValueError(f"unknown alpha mode {mode!r}")
        self.mode = mode
        self.value = value
        self.field_values = field

    @staticmethod
    def fixed(value: float) -> "AlphaPolicy":
        return AlphaPolicy("fixed", value=float(value))

    @staticmethod
    def courant_rule() -> "AlphaPolicy":
        return AlphaPolicy("courant")

    @staticmethod
    def field(values: np.ndarray) -> "AlphaPolicy":
        return AlphaPolicy("field", field=np.asarray(values, dtype=float))

    def resolve(self, C: np.ndarray, step_index: int = 0) -> np.ndarray:
        """Per-node alpha values aligned with the Courant numbers."""
        if self.mode == "fixed":
            return np.full_like(np.asarray(C, dtype=float), self.value)
        if self.mode == "courant":
            return np.minimum(1.0, (2.0 + np.abs(C)) / 6.0)
        values = self.field_values
        if values.ndim == 1:
            return values
        if step_index >= values.shape[0]:
            raise ValueError(f"alpha field has {values.shape[0]} steps, asked for {step_index}")
        return values[step_index]

    def __repr__(self):
        if self.mode == "fixed":
            return f"AlphaPolicy.fixed({self.value})"
        if self.mode == "courant":
            return "AlphaPolicy.courant_rule()"
        return f"AlphaPolicy.field(shape={self.field_values.shape})"


def upwind_gradient(phi: np.ndarray, i: int, alpha: float, side: str) -> float:
    """h-scaled blended one-sided difference at an interior node.

    side "minus" is the stencil used with v_i > 0, side "plus" with v_i < 0.
    alpha = 1 gives the upwind difference, 0.5 the central one, 0 downwind.
    """
    if not 1 <= i <= len(phi) - 2:
        raise IndexError(f"node {i} has no two-sided stencil (0 < i < {len(phi) - 1})")
    if side == "minus":
        return alpha * (phi[i] - phi[i - 1]) + (1.0 - alpha) * (phi[i + 1] - phi[i])
    if side == "plus":
        return alpha * (phi[i + 1] - phi[i]) + (1.0 - alpha) * (phi[i] - phi[i - 1])
    raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")


# ---------------------------------------------------------------------------
# batched sweep kernels; all arrays are (L, M) = (independent lines, nodes)
# ---------------------------------------------------------------------------


def _effective_alpha(C: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Per-node alpha with the boundary reductions applied.

    Next to an inflow boundary (i = 1 with C_1 > 0, i = I-1 with C_{I-1} < 0)
    the wide implicit neighbor i -/+ 2 does not exist; alpha = 0 removes it.
    At an outflow node (i = 0 with C_0 < 0, i = I with C_I > 0) the blended
    time-level-n difference would reach outside the domain; alpha = 1 reduces
    it to the one-sided difference into the interior.
    """
    a = np.array(alpha, dtype=float, copy=True)
    a[..., 0] = np.where(C[..., 0] < 0.0, 1.0, a[..., 0])
    a[..., -1] = np.where(C[..., -1] > 0.0, 1.0, a[..., -1])
    a[..., 1] = np.where(C[..., 1] > 0.0, 0.0, a[..., 1])
    a[..., -2] = np.where(C[..., -2] < 0.0, 0.0, a[..., -2])
    return a


def _pair_mask(C: np.ndarray, order: int) -> np.ndarray:
    """Left indices j of node pairs (j, j+1) to decouple explicitly.

    Strict sign changes C_j < 0 < C_{j+1} always qualify.  The second-order
    stencil additionally couples across a nodal zero flanked by an expanding
    pattern (C_{j-1} < 0, C_j = 0, C_{j+1} > 0), which no sweep order can
    resolve, so that pair is decoupled as well.
    """
    left, right = C[..., :-1], C[..., 1:]
    mask = (left < 0.0) & (right > 0.0)
    if order == 2:
        zero_split = np.zeros_like(mask)
        zero_split[..., 1:] = (left[..., 1:] == 0.0) & (right[..., 1:] > 0.0) & (C[..., :-2] < 0.0)
        mask = mask | zero_split
    return mask


def _apply_pairs(out: np.ndarray, final: np.ndarray, pn: np.ndarray, C: np.ndarray, pairs: np.ndarray) -> None:
    """Explicit stagnation-point updates for decoupled pairs, in place.

    With theta = C_j / (C_j - C_{j+1}) the zero of the interpolant sits at
    x_j + theta*h, and rescaling the Courant numbers by the distance to it
    gives Ct_j = C_j - C_{j+1} < 0 and Ct_{j+1} = -Ct_j.  Both updates are
    convex combinations with the interpolated value there, so they stay
    bounded for arbitrarily large local Courant numbers.
    """
    lines, j = np.nonzero(pairs)
    if len(j) == 0:
        return
    cl = C[lines, j] - C[lines, j + 1]  # < 0
    theta = C[lines, j] / cl
    mid = pn[lines, j] + theta * (pn[lines, j + 1] - pn[lines, j])
    out[lines, j] = (pn[lines, j] - cl * mid) / (1.0 - cl)
    out[lines, j + 1] = (pn[lines, j + 1] - cl * mid) / (1.0 - cl)  # Ct_{j+1} = -cl
    final[lines, j] = True
    final[lines, j + 1] = True


def _apply_dirichlet(out: np.ndarray, final: np.ndarray, C: np.ndarray, bcl: np.ndarray, bcr: np.ndarray) -> None:
    """Pin boundary nodes where characteristics enter the domain.

    Exactly-zero boundary velocity is left alone: the boundary is then
    characteristic, no data is consumed, and the sweep formulas degenerate
    to the identity there (pinning such a node would overwrite a value the
    interior dynamics own, visibly so in split 2D runs with a vanishing
    second velocity component).
    """
    left_in = C[:, 0] > 0.0
    out[left_in, 0] = bcl[left_in]
    final[left_in, 0] = True
    right_in = C[:, -1] < 0.0
    out[right_in, -1] = bcr[right_in]
    final[right_in, -1] = True


def _sweep_order1(pn: np.ndarray, C: np.ndarray, bcl: np.ndarray, bcr: np.ndarray) -> np.ndarray:
    L, M = pn.shape
    out = pn.copy()
    final = np.zeros((L, M), dtype=bool)
    _apply_dirichlet(out, final, C, bcl, bcr)
    _apply_pairs(out, final, pn, C, _pair_mask(C, order=1))

    fwd = (C > 0.0) & ~final
    for i in range(1, M):
        rows = np.nonzero(fwd[:, i])[0]
        if rows.size == 0:
            continue
        c = C[rows, i]
        out[rows, i] = (pn[rows, i] + c * out[rows, i - 1]) / (1.0 + c)

    bwd = (C < 0.0) & ~final
    for i in range(M - 2, -1, -1):
        rows = np.nonzero(bwd[:, i])[0]
        if rows.size == 0:
            continue
        c = C[rows, i]
        out[rows, i] = (pn[rows, i] - c * out[rows, i + 1]) / (1.0 - c)
    return out


def _blended_gradients(pn: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Time-level-n blended differences g^- (for C > 0) and g^+ (for C < 0).

    At the outflow ends the effective alpha is 1, so only the interior
    one-sided difference is ever consulted there.
    """
    gm = np.zeros_like(pn)
    gp = np.zeros_like(pn)
    d = pn[..., 1:] - pn[..., :-1]
    ai = a[..., 1:-1]
    gm[..., 1:-1] = ai * d[..., :-1] + (1.0 - ai) * d[..., 1:]
    gp[..., 1:-1] = ai * d[..., 1:] + (1.0 - ai) * d[..., :-1]
    gm[..., -1] = d[..., -1]
    gp[..., 0] = d[..., 0]
    return gm, gp


def _sweep_order2(pn: np.ndarray, C: np.ndarray, alpha: np.ndarray, bcl: np.ndarray, bcr: np.ndarray) -> np.ndarray:
    L, M = pn.shape
    a = _effective_alpha(C, alpha)
    gm, gp = _blended_gradients(pn, a)
    out = pn.copy()
    final = np.zeros((L, M), dtype=bool)
    _apply_dirichlet(out, final, C, bcl, bcr)
    _apply_pairs(out, final, pn, C, _pair_mask(C, order=2))

    fwd = (C > 0.0) & ~final
    for i in range(1, M):
        rows = np.nonzero(fwd[:, i])[0]
        if rows.size == 0:
            continue
        c = C[rows, i]
        ai = a[rows, i]
        i2 = max(i - 2, 0)  # only read with coefficient 0 (alpha = 0 at i = 1)
        num = (2.0 * pn[rows, i] + (1.0 + 2.0 * ai) * c * out[rows, i - 1]
               - ai * c * out[rows, i2] - c * gm[rows, i])
        out[rows, i] = num / (2.0 + (1.0 + ai) * c)

    bwd = (C < 0.0) & ~final
    for i in range(M - 2, -1, -1):
        rows = np.nonzero(bwd[:, i])[0]
        if rows.size == 0:
            continue
        c = C[rows, i]
        ai = a[rows, i]
        i2 = min(i + 2, M - 1)
        num = (2.0 * pn[rows, i] - (1.0 + 2.0 * ai) * c * out[rows, i + 1]
               + ai * c * out[rows, i2] - c * gp[rows, i])
        out[rows, i] = num / (2.0 - (1.0 + ai) * c)
    return out


# ---------------------------------------------------------------------------
# public single-line steps
# ---------------------------------------------------------------------------


def _bc_values(bc: BoundaryData1D, t: float) -> tuple[float, float]:
    return float(bc.left(t)), float(bc.right(t))


def step_first_order(phin: np.ndarray, C: np.ndarray, crossings: Sequence[ZeroCrossing] | None,
                     bc: BoundaryData1D, t_new: float) -> np.ndarray:
    """One step of the fully implicit first-order upwind scheme.

    The crossing catalog is accepted for interface symmetry; the expanding
    pairs are equivalently recovered from the signs of C.
    """
    phin = np.asarray(phin, dtype=float)
    C = np.asarray(C, dtype=float)
    if phin.shape != C.shape:
        raise ValueError(f"field/Courant shape mismatch: {phin.shape} vs {C.shape}")
    bl, br = _bc_values(bc, t_new)
    return _sweep_order1(phin[None, :], C[None, :], np.array([bl]), np.array([br]))[0]


def step_second_order(phin: np.ndarray, C: np.ndarray, alpha: AlphaPolicy | np.ndarray | float,
                      crossings: Sequence[ZeroCrossing] | None, bc: BoundaryData1D, t_new: float,
                      step_index: int = 0, validate: bool = True) -> np.ndarray:
    """One step of the second-order parametric semi-implicit scheme."""
    phin = np.asarray(phin, dtype=float)
    C = np.asarray(C, dtype=float)
    if phin.shape != C.shape:
        raise ValueError(f"field/Courant shape mismatch: {phin.shape} vs {C.shape}")
    a = resolve_alpha(alpha, C, step_index)
    if validate and (np.any(a < 0.0) or np.any(a > 1.0)):
        raise ValueError("alpha values must lie in [0, 1]")
    bl, br = _bc_values(bc, t_new)
    return _sweep_order2(phin[None, :], C[None, :], a[None, :], np.array([bl]), np.array([br]))[0]


def resolve_alpha(alpha: AlphaPolicy | np.ndarray | float, C: np.ndarray, step_index: int = 0) -> np.ndarray:
    if isinstance(alpha, AlphaPolicy):
        return alpha.resolve(C, step_index)
    if np.isscalar(alpha):
        return np.full_like(np.asarray(C, dtype=float), float(alpha))
    return np.asarray(alpha, dtype=float)


# ---------------------------------------------------------------------------
# dense direct-solve oracle
# ---------------------------------------------------------------------------


def dense_oracle_step(phin: np.ndarray, C: np.ndarray, alpha: AlphaPolicy | np.ndarray | float,
                      crossings: Sequence[ZeroCrossing] | None, bc: BoundaryData1D, t_new: float,
                      order: int = 2) -> np.ndarray:
    """Assemble the full implicit system of the chosen scheme and solve it
    directly.  Verification-only; transcribed from the unsplit relations
    rather than from the sweep formulas, so the two paths double-check each
    other's algebra.
    """
    phin = np.asarray(phin, dtype=float)
    C = np.asarray(C, dtype=float)
    M = len(phin)
    if M > 2001:
        raise ValueError("dense oracle limited to <= 2000 cells")
    A = np.zeros((M, M))
    b = np.zeros(M)
    a = _effective_alpha(C[None, :], resolve_alpha(alpha, C)[None, :])[0]
    bl, br = _bc_values(bc, t_new)

    pairs = _pair_mask(C[None, :], order)[0]
    in_pair = np.zeros(M, dtype=bool)
    pair_value = np.zeros(M)
    for j in np.nonzero(pairs)[0]:
        cl = C[j] - C[j + 1]
        theta = C[j] / cl
        mid = phin[j] + theta * (phin[j + 1] - phin[j])
        pair_value[j] = (phin[j] - cl * mid) / (1.0 - cl)
        pair_value[j + 1] = (phin[j + 1] - cl * mid) / (1.0 - cl)
        in_pair[j] = in_pair[j + 1] = True

    def add_blend(row, i, coef, alpha_row, side):
        """Accumulate coef * h*d^{alpha,side} phi_i^{n+1} into row `row`.

        Zero-weight entries are skipped: at the near-boundary nodes the
        effective alpha removes exactly the stencil point that would fall
        outside the domain.
        """
        if side == "minus":
            entries = ((i, 2.0 * alpha_row - 1.0), (i - 1, -alpha_row), (i + 1, 1.0 - alpha_row))
        else:
            entries = ((i, 1.0 - 2.0 * alpha_row), (i + 1, alpha_row), (i - 1, alpha_row - 1.0))
        for col, w in entries:
            if w != 0.0:
                A[row, col] += coef * w

    for i in range(M):
        if in_pair[i]:
            A[i, i] = 1.0
            b[i] = pair_value[i]
            continue
        if i == 0 and C[0] > 0.0:
            A[i, i] = 1.0
            b[i] = bl
            continue
        if i == M - 1 and C[i] < 0.0:
            A[i, i] = 1.0
            b[i] = br
            continue
        c = C[i]
        if c == 0.0:
            A[i, i] = 1.0
            b[i] = phin[i]
            continue
        if order == 1:
            A[i, i] = 1.0 + abs(c)
            A[i, i - 1 if c > 0 else i + 1] -= abs(c)
            b[i] = phin[i]
            continue
        ai = a[i]
        A[i, i] += 1.0
        if c > 0.0:
            A[i, i] += c
            A[i, i - 1] -= c
            add_blend(i, i - 1, -0.5 * c, ai, "minus")
            b[i] = phin[i] - 0.5 * c * upwind_gradient(phin, i, ai, "minus") if 0 < i < M - 1 \
                else phin[i] - 0.5 * c * (phin[i] - phin[i - 1])
        else:
            A[i, i] -= c
            A[i, i + 1] += c
            add_blend(i, i + 1, -0.5 * c, ai, "plus")
            b[i] = phin[i] - 0.5 * c * upwind_gradient(phin, i, ai, "plus") if 0 < i < M - 1 \
                else phin[i] - 0.5 * c * (phin[i + 1] - phin[i])
    return np.linalg.solve(A, b)


# ---------------------------------------------------------------------------
# time loop
# ---------------------------------------------------------------------------


def solve(problem, grid: Grid1D, tgrid: TimeGrid, config) -> Trajectory:
    """March the chosen non-conservative scheme over the full time grid.

    ``problem`` provides velocity(x, t), initial(x) and boundary data (see
    problems.BenchmarkProblem); ``config`` the order and alpha policy.  A
    time-dependent velocity is refrozen at each step midpoint, and the
    expanding-pair catalog with it.
    """
    traj = Trajectory(grid, tgrid)
    phi = sample(problem.initial, grid)
    traj.append(phi)
    tau = tgrid.tau
    vfield = None
    if not problem.velocity_time_dependent:
        vfield = freeze_midtime(problem.velocity, 0.0, tau, grid)
    for n in range(tgrid.N):
        if problem.velocity_time_dependent:
            vfield = freeze_midtime(problem.velocity, tgrid.t(n), tau, grid)
        C = courant(vfield, tau)
        t_new = tgrid.t(n + 1)
        if config.order == 1:
            phi = step_first_order(phi, C, None, problem.boundary, t_new)
        else:
            phi = step_second_order(phi, C, config.alpha, None, problem.boundary, t_new,
                                    step_index=n + 1, validate=config.validate_alpha)
        traj.append(phi)
    return traj
