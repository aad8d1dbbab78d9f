"""Semi-implicit finite-volume schemes for the conservative advection
equation phi_t + (v(x) phi)_x = 0 on a cell-centered grid.

Every update is written as Phi_i^{n+1} + (tau/h)(F_{i+1/2} - F_{i-1/2}) =
Phi_i^n with a single flux value per face, so the unweighted cell sum changes
only through the two boundary fluxes and discrete mass is conserved exactly
whenever the boundary velocity vanishes.  Fluxes are represented as affine
functions of the unknown cell averages; the resulting linear system is
triangular under upwind ordering and is solved exactly by one forward and one
backward pass over the cells.

The second-order flux at a face with velocity v >= 0 is

    F = v [ Phi_up^{n+1} - (a Phi_{up-1} + (1-a) Phi_up)^{n+1}/2
            + (a Phi_up + (1-a) Phi_down)^n/2 ],

mirrored for v < 0.  The blending weight ``a`` must be one scalar per step:
a per-cell weight would break the telescoping of the face fluxes.  Around a
cell whose faces both point outward (v < 0 on the left face, v > 0 on the
right one, i.e. expanding characteristics) the wide stencil couples the two
flanks into a small circular cluster; the substitution passes finalize
everything else and the cluster is closed by one exact reduced solve, which
keeps the scheme second order there.  Optionally the cluster can instead be
decoupled by switching the faces of the expanding cell to first-order upwind
fluxes (``expanding_fallback``), trading local accuracy for pure
substitutions; mass stays exactly conserved either way since fluxes remain
single-valued.  Missing near-boundary values are closed by linear
extrapolation through the Dirichlet data, and inflow faces carry the
second-order boundary flux v * phi_bc(t^{n+1/2}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid1D, TimeGrid, Trajectory, sample
from .nonconservative import BoundaryData1D
from .velocity import courant, freeze_midtime


@dataclass(frozen=True)
class FluxSet:
    """Per-face numerical fluxes F_{i+1/2}, i = 0..I (units of v * phi)."""

    values: np.ndarray


def total_mass(phi: np.ndarray, h: float) -> float:
    """h-weighted cell sum; comparable across meshes."""
    return h * float(np.sum(phi))


@dataclass(frozen=True)
class _BCVals:
    """Boundary data evaluated at the three time levels a step consults."""

    left_new: float
    right_new: float
    left_old: float = 0.0
    right_old: float = 0.0
    left_mid: float = 0.0
    right_mid: float = 0.0

    @staticmethod
    def at(bc: BoundaryData1D, tn: float, tau: float) -> "_BCVals":
        return _BCVals(float(bc.left(tn + tau)), float(bc.right(tn + tau)),
                       float(bc.left(tn)), float(bc.right(tn)),
                       float(bc.left(tn + 0.5 * tau)), float(bc.right(tn + 0.5 * tau)))


# ---------------------------------------------------------------------------
# affine flux assembly
#
# A face flux (scaled by tau/h) is a pair (coeffs, const): a sparse linear
# form over the unknown vector plus data terms.  Cell arrays are 0-based:
# array index a holds cell a+1 of the formulas; face f = 0..I sits left of
# cell index f.
# ---------------------------------------------------------------------------


def _marked_cells(Cf: np.ndarray) -> np.ndarray:
    """Cells switched to first-order fluxes (0-based).

    A cell is marked when both its faces point outward (expanding pattern),
    including the split variant where the two outward faces are separated by
    an exactly-zero face, which otherwise couples the two adjacent cells
    symmetrically and defeats any sweep order.
    """
    mark = (Cf[:-1] < 0.0) & (Cf[1:] > 0.0)
    zero = np.nonzero((Cf[1:-1] == 0.0) & (Cf[:-2] < 0.0) & (Cf[2:] > 0.0))[0]
    for f in zero + 1:  # interior face index with C = 0
        mark[f - 1] = True
        mark[f] = True
    return mark


def _face_is_first_order(Cf: np.ndarray, order: int, fallback: bool = False) -> np.ndarray:
    nfaces = len(Cf)
    if order == 1:
        return np.ones(nfaces, dtype=bool)
    first = np.zeros(nfaces, dtype=bool)
    if fallback:
        mark = _marked_cells(Cf)
        first[:-1] |= mark  # left face of a marked cell
        first[1:] |= mark   # right face
    return first


class _AffineFlux:
    __slots__ = ("coeffs", "const")

    def __init__(self):
        self.coeffs: dict[int, float] = {}
        self.const = 0.0

    def add(self, idx: int, coef: float) -> None:
        if coef != 0.0:
            self.coeffs[idx] = self.coeffs.get(idx, 0.0) + coef

    def value(self, phi_new: np.ndarray) -> float:
        return self.const + sum(c * phi_new[j] for j, c in self.coeffs.items())


def _assemble_scaled_fluxes(pn: np.ndarray, Cf: np.ndarray, alpha: float, bv: _BCVals,
                            order: int, fallback: bool = False) -> list[_AffineFlux]:
    """(tau/h)-scaled flux at every face as an affine form in Phi^{n+1}."""
    ncells = len(pn)
    nfaces = ncells + 1
    first = _face_is_first_order(Cf, order, fallback)

    def avg_new(flux, a_left, weight, wl, wr):
        """weight * (wl*Phi_{a_left} + wr*Phi_{a_left+1})^{n+1} with ghosts
        Phi_{-1} = 2*left_new - Phi_0 and Phi_{ncells} = 2*right_new - Phi_{ncells-1}."""
        for a, w in ((a_left, wl), (a_left + 1, wr)):
            if w == 0.0:
                continue
            if a < 0:
                flux.const += weight * w * 2.0 * bv.left_new
                flux.add(0, -weight * w)
            elif a >= ncells:
                flux.const += weight * w * 2.0 * bv.right_new
                flux.add(ncells - 1, -weight * w)
            else:
                flux.add(a, weight * w)

    def old_value(a):
        if a < 0:
            return 2.0 * bv.left_old - pn[0]
        if a >= ncells:
            return 2.0 * bv.right_old - pn[ncells - 1]
        return pn[a]

    fluxes = []
    for f in range(nfaces):
        flux = _AffineFlux()
        c = Cf[f]
        cp, cm = max(c, 0.0), min(c, 0.0)
        if first[f]:
            # upwind flux with Dirichlet ghost cells
            if cp > 0.0:
                if f == 0:
                    flux.const += cp * bv.left_new
                else:
                    flux.add(f - 1, cp)
            if cm < 0.0:
                if f == nfaces - 1:
                    flux.const += cm * bv.right_new
                else:
                    flux.add(f, cm)
            fluxes.append(flux)
            continue
        if cp > 0.0:
            if f == 0:
                flux.const += cp * bv.left_mid  # inflow face
            else:
                flux.add(f - 1, cp)
                avg_new(flux, f - 2, -0.5 * cp, alpha, 1.0 - alpha)
                flux.const += 0.5 * cp * (alpha * pn[f - 1] + (1.0 - alpha) * old_value(f))
        if cm < 0.0:
            if f == nfaces - 1:
                flux.const += cm * bv.right_mid  # inflow face
            else:
                flux.add(f, cm)
                avg_new(flux, f, -0.5 * cm, 1.0 - alpha, alpha)
                flux.const += 0.5 * cm * ((1.0 - alpha) * old_value(f - 1) + alpha * pn[f])
        fluxes.append(flux)
    return fluxes


def _solve_rows(pn: np.ndarray, affine: list[_AffineFlux]) -> np.ndarray:
    """Solve Phi_a + G_{a+1} - G_a = pn_a by ordered substitution passes.

    A forward pass finalizes every cell whose unresolved dependencies all
    point left, a backward pass the mirror image; with upwind fluxes this
    resolves everything except the small clusters that straddle an expanding
    velocity zero, whose flanks reference each other across the stagnation
    region.  Those remaining cells (the cluster plus whatever chains hang off
    it) are closed by one exact reduced solve, after which nothing is left.
    """
    ncells = len(pn)
    diag = np.empty(ncells)
    offdiag: list[dict[int, float]] = []
    rhs = np.empty(ncells)
    for a in range(ncells):
        right, left = affine[a + 1], affine[a]
        row: dict[int, float] = {}
        for j, w in right.coeffs.items():
            row[j] = row.get(j, 0.0) + w
        for j, w in left.coeffs.items():
            row[j] = row.get(j, 0.0) - w
        diag[a] = 1.0 + row.pop(a, 0.0)
        offdiag.append({j: w for j, w in row.items() if w != 0.0})
        rhs[a] = pn[a] - (right.const - left.const)

    out = np.empty(ncells)
    final = np.zeros(ncells, dtype=bool)

    def finalize(a) -> bool:
        deps = offdiag[a]
        if all(final[j] for j in deps):
            out[a] = (rhs[a] - sum(w * out[j] for j, w in deps.items())) / diag[a]
            final[a] = True
            return True
        return False

    progress = True
    while progress and not final.all():
        progress = False
        for a in range(ncells):
            if not final[a] and all(final[j] for j in offdiag[a] if j > a):
                if finalize(a):
                    progress = True
        for a in range(ncells - 1, -1, -1):
            if not final[a] and finalize(a):
                progress = True

    rest = np.nonzero(~final)[0]
    if rest.size:
        pos = {j: k for k, j in enumerate(rest)}
        A = np.zeros((rest.size, rest.size))
        b = np.empty(rest.size)
        for k, a in enumerate(rest):
            A[k, k] = diag[a]
            b[k] = rhs[a]
            for j, w in offdiag[a].items():
                if j in pos:
                    A[k, pos[j]] = w
                else:
                    b[k] -= w * out[j]
        out[rest] = np.linalg.solve(A, b)
    return out


# ---------------------------------------------------------------------------
# public steps
# ---------------------------------------------------------------------------


def step_fv_first_order(pn: np.ndarray, Cf: np.ndarray, bc: BoundaryData1D, t_new: float) -> np.ndarray:
    """One step of the first-order implicit upwind finite-volume scheme."""
    pn = np.asarray(pn, dtype=float)
    Cf = np.asarray(Cf, dtype=float)
    if len(Cf) != len(pn) + 1:
        raise ValueError(f"need {len(pn) + 1} face Courant numbers, got {len(Cf)}")
    bv = _BCVals(float(bc.left(t_new)), float(bc.right(t_new)))
    return _solve_rows(pn, _assemble_scaled_fluxes(pn, Cf, 0.0, bv, order=1))


def step_fv_second_order(pn: np.ndarray, Cf: np.ndarray, alpha: float, bc: BoundaryData1D,
                         tn: float, tau: float, expanding_fallback: bool = False) -> np.ndarray:
    """One step of the second-order conservative scheme with scalar alpha.

    With ``expanding_fallback`` the faces of expanding cells switch to
    first-order upwind fluxes, decoupling the stagnation cluster so that the
    two substitution passes suffice on their own; the default keeps the
    second-order fluxes everywhere and closes the cluster exactly.
    """
    pn = np.asarray(pn, dtype=float)
    Cf = np.asarray(Cf, dtype=float)
    if len(Cf) != len(pn) + 1:
        raise ValueError(f"need {len(pn) + 1} face Courant numbers, got {len(Cf)}")
    if np.ndim(alpha) != 0:
        raise ValueError("conservative scheme needs a single scalar alpha per step")
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    bv = _BCVals.at(bc, tn, tau)
    return _solve_rows(pn, _assemble_scaled_fluxes(pn, Cf, alpha, bv, order=2,
                                                   fallback=expanding_fallback))


def fluxes(pn: np.ndarray, pnew: np.ndarray, Cf: np.ndarray, alpha: float, bc: BoundaryData1D,
           tn: float, tau: float, h: float, order: int = 2,
           expanding_fallback: bool = False) -> FluxSet:
    """Per-face fluxes realized by a completed step (diagnostic).

    Rebuilding the update from these values reproduces the step output:
    Phi^{n+1} = Phi^n - (tau/h)(F_right - F_left) holds to rounding.
    """
    bv = _BCVals.at(bc, tn, tau) if order == 2 else _BCVals(float(bc.left(tn + tau)), float(bc.right(tn + tau)))
    affine = _assemble_scaled_fluxes(np.asarray(pn, float), np.asarray(Cf, float),
                                     float(alpha), bv, order, fallback=expanding_fallback)
    scale = h / tau
    pnew = np.asarray(pnew, dtype=float)
    return FluxSet(np.array([scale * g.value(pnew) for g in affine]))


# ---------------------------------------------------------------------------
# dense oracle, transcribed from the collected per-cell update formulas
# ---------------------------------------------------------------------------


def dense_oracle_fv_step(pn: np.ndarray, Cf: np.ndarray, alpha: float, bc: BoundaryData1D,
                         tn: float, tau: float, order: int = 2,
                         expanding_fallback: bool = False) -> np.ndarray:
    """Direct solve of the coupled system, assembled independently of the
    sweep path.  Interior and boundary rows follow the collected update
    formulas term by term (ghosts eliminated through the extrapolation
    closures); only rows mixing first- and second-order faces reuse the flux
    assembly, since their collected form exists nowhere else.
    """
    pn = np.asarray(pn, dtype=float)
    Cf = np.asarray(Cf, dtype=float)
    ncells = len(pn)
    if ncells > 2000:
        raise ValueError("dense oracle limited to <= 2000 cells")
    a = float(alpha)
    bv = _BCVals.at(bc, tn, tau)

    A = np.zeros((ncells, ncells))
    b = np.zeros(ncells)
    first = _face_is_first_order(Cf, order, expanding_fallback)
    mixed_rows = []

    def cp(f):
        return max(Cf[f], 0.0)

    def cm(f):
        return min(Cf[f], 0.0)

    for idx in range(ncells):
        fl, fr = idx, idx + 1
        if order == 1 or (first[fl] and first[fr]):
            # upwind row: (1 + Cp_r - Cm_l) Phi = Phi^n + Cp_l Phi_left - Cm_r Phi_right
            A[idx, idx] = 1.0 + cp(fr) - cm(fl)
            b[idx] = pn[idx]
            if cp(fl) > 0.0:
                if idx == 0:
                    b[idx] += cp(fl) * bv.left_new
                else:
                    A[idx, idx - 1] -= cp(fl)
            if cm(fr) < 0.0:
                if idx == ncells - 1:
                    b[idx] -= cm(fr) * bv.right_new
                else:
                    A[idx, idx + 1] += cm(fr)
            continue
        if first[fl] or first[fr]:
            mixed_rows.append(idx)
            continue

        b[idx] = 2.0 * pn[idx]
        if idx == 0:
            # left boundary cell; ghosts eliminated through the Dirichlet data
            A[idx, idx] = 2.0 + (1.0 + 2.0 * a) * cp(fr) - (1.0 + a) * cm(fl)
            b[idx] += cp(fr) * (2.0 * a * bv.left_new - a * pn[0] - (1.0 - a) * pn[1])
            if cm(fr) < 0.0:
                A[idx, 1] += (1.0 + a) * cm(fr)
                if ncells >= 3:
                    A[idx, 2] -= a * cm(fr)
                else:  # Phi_3 is the right ghost on a two-cell grid
                    b[idx] += a * cm(fr) * 2.0 * bv.right_new
                    A[idx, 1] += a * cm(fr)
                b[idx] -= cm(fr) * (a * pn[1] + (1.0 - a) * pn[0])
            b[idx] += 2.0 * cp(fl) * bv.left_mid
            if cm(fl) < 0.0:
                A[idx, 1] += a * cm(fl)
                b[idx] -= cm(fl) * ((1.0 - 2.0 * a) * pn[0] - 2.0 * (1.0 - a) * bv.left_old)
            continue
        if idx == ncells - 1:
            A[idx, idx] = 2.0 + (1.0 + a) * cp(fr) - (1.0 + 2.0 * a) * cm(fl)
            if cp(fr) > 0.0:
                A[idx, idx - 1] -= a * cp(fr)
                b[idx] += cp(fr) * ((1.0 - 2.0 * a) * pn[idx] - 2.0 * (1.0 - a) * bv.right_old)
            b[idx] -= 2.0 * cm(fr) * bv.right_mid
            if cp(fl) > 0.0:
                A[idx, idx - 1] -= (1.0 + a) * cp(fl)
                if idx - 2 >= 0:
                    A[idx, idx - 2] += a * cp(fl)
                else:  # Phi_{I-2} is the left ghost on a two-cell grid
                    b[idx] -= a * cp(fl) * 2.0 * bv.left_new
                    A[idx, idx - 1] -= a * cp(fl)
                b[idx] += cp(fl) * (a * pn[idx - 1] + (1.0 - a) * pn[idx])
            if cm(fl) < 0.0:
                b[idx] -= cm(fl) * (2.0 * a * bv.right_new - a * pn[idx] - (1.0 - a) * pn[idx - 1])
            continue

        # interior rows
        A[idx, idx] = 2.0 + (1.0 + a) * cp(fr) - (1.0 + a) * cm(fl)
        if cp(fr) > 0.0:
            A[idx, idx - 1] -= a * cp(fr)
            b[idx] += cp(fr) * (-a * pn[idx] - (1.0 - a) * pn[idx + 1])
        if cm(fr) < 0.0:
            A[idx, idx + 1] += (1.0 + a) * cm(fr)
            if idx + 2 < ncells:
                A[idx, idx + 2] -= a * cm(fr)
            else:  # Phi_{i+2} is the right ghost: 2*right_new - Phi_{i+1}
                b[idx] += a * cm(fr) * 2.0 * bv.right_new
                A[idx, idx + 1] += a * cm(fr)
            b[idx] -= cm(fr) * (a * pn[idx + 1] + (1.0 - a) * pn[idx])
        if cp(fl) > 0.0:
            A[idx, idx - 1] -= (1.0 + a) * cp(fl)
            if idx - 2 >= 0:
                A[idx, idx - 2] += a * cp(fl)
            else:  # Phi_{i-2} is the left ghost: 2*left_new - Phi_{i-1}
                b[idx] -= a * cp(fl) * 2.0 * bv.left_new
                A[idx, idx - 1] -= a * cp(fl)
            b[idx] += cp(fl) * (a * pn[idx - 1] + (1.0 - a) * pn[idx])
        if cm(fl) < 0.0:
            A[idx, idx + 1] += a * cm(fl)
            b[idx] -= cm(fl) * (-a * pn[idx] - (1.0 - a) * pn[idx - 1])

    if mixed_rows:
        affine = _assemble_scaled_fluxes(pn, Cf, a, bv, order, fallback=expanding_fallback)
        for idx in mixed_rows:
            A[idx, idx] = 1.0
            b[idx] = pn[idx]
            for sign, flux in ((1.0, affine[idx + 1]), (-1.0, affine[idx])):
                b[idx] -= sign * flux.const
                for j, w in flux.coeffs.items():
                    A[idx, j] += sign * w
    return np.linalg.solve(A, b)


# ---------------------------------------------------------------------------
# time loop
# ---------------------------------------------------------------------------


def solve_fv(problem, grid: Grid1D, tgrid: TimeGrid, config) -> Trajectory:
    """March the conservative scheme over the full time grid."""
    if grid.centering != "cell":
        raise ValueError("conservative solver needs a cell-centered grid")
    traj = Trajectory(grid, tgrid)
    phi = sample(problem.initial, grid)
    traj.append(phi)
    tau = tgrid.tau
    vface = None
    if not problem.velocity_time_dependent:
        vface = freeze_midtime(problem.velocity, 0.0, tau, grid)
    for n in range(tgrid.N):
        if problem.velocity_time_dependent:
            vface = freeze_midtime(problem.velocity, tgrid.t(n), tau, grid)
        Cf = courant(vface, tau)
        if config.order == 1:
            phi = step_fv_first_order(phi, Cf, problem.boundary, tgrid.t(n + 1))
        else:
            alpha = config.alpha
            if hasattr(alpha, "mode"):
                if alpha.mode != "fixed":
                    raise ValueError("conservative scheme supports only a fixed alpha")
                alpha = alpha.value
            phi = step_fv_second_order(phi, Cf, alpha, problem.boundary, tgrid.t(n), tau)
        traj.append(phi)
    return traj
