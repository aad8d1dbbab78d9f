import numpy as np
import pytest

from sweepadvect.conservative import (dense_oracle_fv_step, fluxes, step_fv_first_order,
                                      step_fv_second_order, total_mass)
from sweepadvect.nonconservative import BoundaryData1D, step_second_order


def random_fv_instance(rng, M=None):
    M = M or int(rng.integers(4, 51))
    phi = rng.normal(size=M)
    Cf = rng.normal(scale=2.5, size=M + 1)
    if rng.random() < 0.3:
        Cf[rng.integers(1, M)] = 0.0
    bc = BoundaryData1D(lambda t: np.sin(t) + 0.4, lambda t: np.cos(2 * t))
    return phi, Cf, bc


def test_total_mass():
    assert total_mass(np.ones(10), 0.3) == pytest.approx(3.0)
    assert total_mass(np.zeros(7), 0.1) == 0.0


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_constant_preservation_constant_velocity(sign):
    bc = BoundaryData1D.constant(3.0)
    pn = np.full(10, 3.0)
    Cf = np.full(11, sign * 1.7)
    out = step_fv_first_order(pn, Cf, bc, 1.0)
    assert np.allclose(out, 3.0, atol=1e-14)
    out = step_fv_second_order(pn, Cf, 0.6, bc, 0.0, 0.5)
    assert np.allclose(out, 3.0, atol=1e-14)


@pytest.mark.parametrize("order", [1, 2])
def test_mass_conserved_with_zero_boundary_velocity(order):
    """Telescoping fluxes: the unweighted cell sum may drift only by rounding
    when both boundary faces carry zero velocity."""
    rng = np.random.default_rng(11)
    bc = BoundaryData1D.constant(0.7)  # values irrelevant: boundary fluxes vanish
    for _ in range(25):
        M = int(rng.integers(6, 40))
        phi = rng.normal(size=M)
        Cf = rng.normal(scale=2.0, size=M + 1)
        Cf[0] = Cf[-1] = 0.0
        total0 = phi.sum()
        for k in range(10):
            if order == 1:
                phi = step_fv_first_order(phi, Cf, bc, 0.1 * k)
            else:
                phi = step_fv_second_order(phi, Cf, 0.5, bc, 0.1 * k, 0.1)
        assert abs(phi.sum() - total0) <= 1e-13 * max(1.0, np.abs(phi).sum())


@pytest.mark.parametrize("order,fallback", [(1, False), (2, False), (2, True)])
def test_sweep_equals_dense_oracle(order, fallback):
    rng = np.random.default_rng(77 + order + int(fallback))
    worst = 0.0
    for _ in range(200):
        phi, Cf, bc = random_fv_instance(rng)
        alpha = float(rng.uniform(0, 1))
        if order == 1:
            got = step_fv_first_order(phi, Cf, bc, 0.7)
            want = dense_oracle_fv_step(phi, Cf, alpha, bc, 0.0, 0.7, order=1)
        else:
            got = step_fv_second_order(phi, Cf, alpha, bc, 0.2, 0.5, expanding_fallback=fallback)
            want = dense_oracle_fv_step(phi, Cf, alpha, bc, 0.2, 0.5, order=2,
                                        expanding_fallback=fallback)
        scale = max(1.0, np.max(np.abs(phi)))
        worst = max(worst, np.max(np.abs(got - want)) / scale)
    assert worst <= 1e-11


def test_oracle_identity_at_zero_courant():
    phi = np.linspace(0, 1, 8)
    bc = BoundaryData1D.constant(0.0)
    out = dense_oracle_fv_step(phi, np.zeros(9), 0.4, bc, 0.0, 0.5, order=2)
    assert np.allclose(out, phi, atol=1e-15)


def test_alpha_must_be_scalar_in_range():
    bc = BoundaryData1D.constant(0.0)
    with pytest.raises(ValueError, match="scalar"):
        step_fv_second_order(np.zeros(6), np.ones(7), np.full(6, 0.5), bc, 0.0, 0.1)
    with pytest.raises(ValueError, match="alpha"):
        step_fv_second_order(np.zeros(6), np.ones(7), 1.2, bc, 0.0, 0.1)


def test_flux_reconstruction_identity():
    """The per-face fluxes evaluated at the completed step must rebuild it:
    Phi^{n+1} = Phi^n - (tau/h)(F_r - F_l) exactly."""
    rng = np.random.default_rng(9)
    bc = BoundaryData1D(lambda t: np.sin(t), lambda t: np.cos(t))
    h, tau = 0.11, 0.23
    for _ in range(50):
        phi, Cf, _ = random_fv_instance(rng)
        alpha = float(rng.uniform(0, 1))
        pnew = step_fv_second_order(phi, Cf, alpha, bc, 0.3, tau)
        F = fluxes(phi, pnew, Cf, alpha, bc, 0.3, tau, h).values
        recon = phi - (tau / h) * (F[1:] - F[:-1])
        assert np.max(np.abs(recon - pnew)) <= 1e-12 * max(1.0, np.max(np.abs(phi)))


def test_fluxes_vanish_for_zero_velocity():
    bc = BoundaryData1D.constant(1.0)
    phi = np.linspace(0, 2, 9)
    F = fluxes(phi, phi, np.zeros(10), 0.5, bc, 0.0, 0.1, 0.2).values
    assert np.all(F == 0.0)


def test_flux_constant_state_constant_velocity():
    bc = BoundaryData1D.constant(4.0)
    phi = np.full(9, 4.0)
    h, tau = 0.25, 0.1
    v = 1.3
    Cf = np.full(10, tau * v / h)
    pnew = step_fv_second_order(phi, Cf, 0.5, bc, 0.0, tau)
    F = fluxes(phi, pnew, Cf, 0.5, bc, 0.0, tau, h).values
    assert np.allclose(F, v * 4.0, rtol=1e-14)


def nc_residual(i, pn, pnew, C, alpha):
    """Interior relation of the non-conservative second-order update,
    multiplied through by its denominator (zero when pnew is the step)."""
    a, c = alpha, C
    if c > 0:
        g = a * (pn[i] - pn[i - 1]) + (1 - a) * (pn[i + 1] - pn[i])
        return ((2 + (1 + a) * c) * pnew[i] - (1 + 2 * a) * c * pnew[i - 1]
                + a * c * pnew[i - 2] - 2 * pn[i] + c * g)
    g = a * (pn[i + 1] - pn[i]) + (1 - a) * (pn[i] - pn[i - 1])
    return ((2 - (1 + a) * c) * pnew[i] + (1 + 2 * a) * c * pnew[i + 1]
            - a * c * pnew[i + 2] - 2 * pn[i] + c * g)


@pytest.mark.parametrize("v", [0.9, -1.4])
def test_equivalence_with_nonconservative_at_constant_velocity(v):
    """For constant v the conservative flux form collects into exactly the
    non-conservative parametric update; the two interior relations agree as
    algebraic identities on arbitrary value pairs."""
    rng = np.random.default_rng(15)
    M = 16
    h, tau = 0.1, 0.25
    bc = BoundaryData1D(lambda t: 0.3 * np.sin(t) + 0.2, lambda t: 0.1 * np.cos(t))
    Cf = np.full(M + 1, tau * v / h)
    for _ in range(20):
        pn = rng.normal(size=M)
        pnew = rng.normal(size=M)
        alpha = float(rng.uniform(0, 1))
        F = fluxes(pn, pnew, Cf, alpha, bc, 0.0, tau, h).values
        for i in range(3, M - 3):
            r_fv = 2.0 * (pnew[i] - pn[i] + (tau / h) * (F[i + 1] - F[i]))
            r_nc = nc_residual(i, pn, pnew, tau * v / h, alpha)
            assert abs(r_fv - r_nc) <= 1e-12 * max(1.0, abs(r_nc))
