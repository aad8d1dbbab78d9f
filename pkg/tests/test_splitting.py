import numpy as np
import pytest

from sweepadvect.driver import SchemeConfig
from sweepadvect.grid import TimeGrid, make_grid, sample2d
from sweepadvect.nonconservative import AlphaPolicy, BoundaryData1D
from sweepadvect.nonconservative import solve as solve_1d
from sweepadvect.problems import BenchmarkProblem, diagonal_2d
from sweepadvect.splitting import evolve2d, solve2d, strang_step


def config(alpha=0.5, order=2):
    return SchemeConfig(family="nc", order=order, alpha=AlphaPolicy.fixed(alpha))


def make_problem(v1, v2, initial, inflow, T=0.5):
    return BenchmarkProblem(
        name="t", dimension=2, origin=0.0, length=1.0, T=T,
        velocity=(v1, v2), initial=initial, boundary=inflow)


def test_constant_preserved_in_2d():
    zero = lambda x, y, t: np.zeros(np.broadcast(x, y).shape)
    spin = lambda x, y, t: np.sin(2 * np.pi * (x + 2 * y)) + 0 * x
    p = make_problem(spin, spin, lambda x, y: 4.0 + 0 * x * y,
                     lambda x, y, t: 4.0 + 0 * (x + y))
    g = make_grid(0.0, 1.0, 16, "node")
    traj = solve2d(p, g, TimeGrid(0.5, 3), config())
    assert len(traj) == 4
    for f in traj:
        assert np.allclose(f, 4.0, atol=1e-12)


def test_zero_second_velocity_reduces_to_rowwise_half_steps():
    """With v2 = 0 the middle substep is the identity, so a full split step
    equals two half steps of the 1D scheme applied to every row."""
    g = make_grid(0.0, 1.0, 12, "node")
    tau = 0.3
    v = lambda x, t: 1.0 + 0.5 * np.sin(2 * np.pi * x)
    initial = lambda x: np.exp(-20 * (x - 0.4) ** 2)
    bcl, bcr = 0.25, 0.0

    p2 = make_problem(lambda x, y, t: v(x, t) + 0 * y,
                      lambda x, y, t: np.zeros(np.broadcast(x, y).shape),
                      lambda x, y: initial(x) + 0 * y,
                      lambda x, y, t: np.where(x < 0.5, bcl, bcr) + 0 * y)
    phi0 = sample2d(p2.initial, g, g)
    out2d = strang_step(phi0, *p2.velocity, 0.0, tau, g, config(0.4), p2.boundary)

    p1 = BenchmarkProblem(name="t1", dimension=1, origin=0.0, length=1.0, T=tau,
                          velocity=v, initial=initial,
                          boundary=BoundaryData1D.constant(bcl, bcr))
    traj = solve_1d(p1, g, TimeGrid(tau, 2), config(0.4))  # two half steps
    for j in range(13):
        assert np.allclose(out2d[:, j], traj.final, atol=1e-13)


def test_zero_first_velocity_reduces_to_columnwise_full_step():
    g = make_grid(0.0, 1.0, 12, "node")
    tau = 0.3
    v = lambda y, t: 0.8 - 0.4 * np.cos(2 * np.pi * y)
    initial = lambda y: np.sin(np.pi * y)
    p2 = make_problem(lambda x, y, t: np.zeros(np.broadcast(x, y).shape),
                      lambda x, y, t: v(y, t) + 0 * x,
                      lambda x, y: initial(y) + 0 * x,
                      lambda x, y, t: np.zeros(np.broadcast(x, y).shape))
    phi0 = sample2d(p2.initial, g, g)
    out2d = strang_step(phi0, *p2.velocity, 0.0, tau, g, config(0.6), p2.boundary)
    p1 = BenchmarkProblem(name="t1", dimension=1, origin=0.0, length=1.0, T=tau,
                          velocity=v, initial=initial,
                          boundary=BoundaryData1D.constant(0.0, 0.0))
    traj = solve_1d(p1, g, TimeGrid(tau, 1), config(0.6))  # one full step
    for i in range(13):
        assert np.allclose(out2d[i, :], traj.final, atol=1e-13)


def test_courant_split_between_directions():
    # equal velocity magnitudes: the x substeps run at half the y Courant number
    from sweepadvect.harness import run_2d

    p = diagonal_2d()
    r = run_2d(p, 20, 1, "fixed:0.5", keep_final=False)
    assert r["max_courant_y"] == pytest.approx(1.6, abs=0.01)
    assert r["max_courant_x"] == pytest.approx(0.8, abs=0.005)


def test_evolve_levels_and_solve2d_agree():
    p = diagonal_2d()
    g = make_grid(p.origin, p.length, 10, "node")
    tg = TimeGrid(p.T, 2)
    seen = []
    final = evolve2d(p, g, tg, config(0.0), on_level=lambda n, f: seen.append((n, f.copy())))
    traj = solve2d(p, g, tg, config(0.0))
    assert [n for n, _ in seen] == [0, 1, 2]
    assert np.array_equal(final, traj.final)
    for (n, f), g2 in zip(seen, traj.fields):
        assert np.array_equal(f, g2)


def test_alpha_field_rejected_in_2d():
    p = diagonal_2d()
    g = make_grid(p.origin, p.length, 8, "node")
    cfg = SchemeConfig(family="nc", order=2,
                       alpha=AlphaPolicy.field(np.full((3, 9), 0.5)))
    with pytest.raises(ValueError, match="2D"):
        solve2d(p, g, TimeGrid(p.T, 2), cfg)
