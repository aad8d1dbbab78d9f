import numpy as np
import pytest

from sweepadvect.analysis import final_error
from sweepadvect.grid import TimeGrid, Trajectory, make_grid
from sweepadvect.nonconservative import BoundaryData1D
from sweepadvect.nonconservative import solve as solve_nc
from sweepadvect.optimizer import (AlphaField, _field_config, descent_step, grad_J,
                                   loss_J, optimize_once)
from sweepadvect.problems import BenchmarkProblem, optimizer_problem_1d


def small_problem(seed=0, I=10):
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(1.5, 3.0)
    return BenchmarkProblem(
        name="small", dimension=1, origin=-1.0, length=2.0, T=0.5,
        velocity=lambda x, t: np.sin(coeffs * x + 0.4),  # sign-changing
        initial=lambda x: np.sin(np.pi * x) - 0.3,       # dips negative
        boundary=BoundaryData1D.constant(-0.3, -0.3))


def J_of(problem, grid, tgrid, values):
    traj = solve_nc(problem, grid, tgrid, _field_config(AlphaField(values)))
    return loss_J(traj, grid.h, tgrid.tau)


def test_loss_zero_for_nonnegative_trajectory():
    g = make_grid(0.0, 1.0, 4, "node")
    traj = Trajectory(g, TimeGrid(1.0, 1), [np.ones(5), np.full(5, 0.2)])
    assert loss_J(traj, g.h, 1.0) == 0.0


def test_loss_single_negative_value():
    g = make_grid(0.0, 1.0, 4, "node")
    f = np.zeros(5)
    f[3] = -0.2
    traj = Trajectory(g, TimeGrid(1.0, 1), [np.zeros(5), f])
    assert loss_J(traj, g.h, 1.0) == pytest.approx(g.h * 1.0 * 0.04)


def test_descent_step_arithmetic():
    g = make_grid(0.0, 1.0, 4, "node")
    a = AlphaField.initial(g, TimeGrid(1.0, 3))
    out = descent_step(a, np.ones_like(a.values), 0.1)
    assert np.allclose(out.values, 0.4)
    assert np.array_equal(descent_step(a, np.zeros_like(a.values), 5.0).values, a.values)
    assert np.array_equal(descent_step(a, np.ones_like(a.values), 0.0).values, a.values)


def test_gradient_zero_for_nonnegative_trajectory():
    p = BenchmarkProblem(
        name="pos", dimension=1, origin=0.0, length=1.0, T=0.4,
        velocity=lambda x, t: 1.0 + 0 * x,
        initial=lambda x: 1.0 + 0.5 * np.sin(2 * np.pi * x),
        boundary=BoundaryData1D.constant(1.0, 1.0))
    g = make_grid(0.0, 1.0, 12, "node")
    tg = TimeGrid(0.4, 6)
    grad = grad_J(p, g, tg, AlphaField.initial(g, tg))
    assert np.all(grad == 0.0)


def test_gradient_matches_central_differences():
    """Adjoint vs the independent finite-difference oracle on a sign-changing
    instance exercising both sweeps, Dirichlet pins and expanding pairs."""
    p = small_problem(seed=3)
    I, N = 10, 5
    g = make_grid(p.origin, p.length, I, "node")
    tg = TimeGrid(p.T, N)
    rng = np.random.default_rng(17)
    alpha = AlphaField(np.clip(0.5 + 0.25 * rng.normal(size=(N + 1, I + 1)), 0.05, 0.95))
    grad = grad_J(p, g, tg, alpha)
    gmax = np.max(np.abs(grad))
    assert gmax > 0.0
    eps = 1e-6
    for n in range(1, N):
        for i in range(1, I):
            vp = alpha.values.copy()
            vm = alpha.values.copy()
            vp[n, i] += eps
            vm[n, i] -= eps
            fd = (J_of(p, g, tg, vp) - J_of(p, g, tg, vm)) / (2 * eps)
            assert abs(fd - grad[n, i]) <= 1e-5 * gmax


def test_directional_derivative():
    p = small_problem(seed=5)
    I, N = 12, 6
    g = make_grid(p.origin, p.length, I, "node")
    tg = TimeGrid(p.T, N)
    alpha = AlphaField.initial(g, tg)
    grad = grad_J(p, g, tg, alpha)
    rng = np.random.default_rng(2)
    d = rng.normal(size=alpha.values.shape)
    d[0] = d[-1] = 0.0
    d[:, 0] = d[:, -1] = 0.0
    eps = 1e-6
    fd = (J_of(p, g, tg, alpha.values + eps * d) - J_of(p, g, tg, alpha.values - eps * d)) / (2 * eps)
    ad = float(np.sum(grad * d))
    assert fd == pytest.approx(ad, rel=1e-6)


def test_gradient_sparsity_outside_domain_of_dependence():
    """A weight whose node never influences any negative value carries no
    gradient: with rightward transport, weights downstream of the last
    negative region at the final time must vanish."""
    p = BenchmarkProblem(
        name="dd", dimension=1, origin=0.0, length=2.0, T=0.2,
        velocity=lambda x, t: 1.0 + 0 * x,
        initial=lambda x: np.where(x < 0.5, -0.5, 1.0),  # negatives only upstream
        boundary=BoundaryData1D.constant(-0.5, 1.0))
    I, N = 20, 4
    g = make_grid(0.0, 2.0, I, "node")
    tg = TimeGrid(0.2, N)
    grad = grad_J(p, g, tg, AlphaField.initial(g, tg))
    assert np.max(np.abs(grad)) > 0.0
    # C = 0.5: negatives never travel past x ~ 0.5 + C*h*N = 0.7 -> nodes >= 12
    # (x >= 1.2) are outside every level's domain of dependence
    assert np.max(np.abs(grad[:, 12:])) <= 1e-12


def test_optimize_once_eta_zero_is_identity():
    p = optimizer_problem_1d()
    rep = optimize_once(p, make_grid(p.origin, p.length, 30, "node"), TimeGrid(p.T, 10), 0.0)
    assert rep.J_after == rep.J_before
    assert rep.E_after == rep.E_before


def test_optimize_once_small_eta_monotone():
    p = optimizer_problem_1d()
    g = make_grid(p.origin, p.length, 70, "node")
    tg = TimeGrid(p.T, 50)
    rep = optimize_once(p, g, tg, 50.0)
    assert rep.J_after < rep.J_before
    assert rep.E_after <= rep.E_before + 1e-12
    assert rep.J_after_clamped <= rep.J_before
