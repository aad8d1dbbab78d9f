import numpy as np
import pytest

from sweepadvect.grid import make_grid
from sweepadvect.velocity import (VelocityField1D, cminus, courant, cplus,
                                  find_zero_crossings, freeze_midtime)


def test_courant_arithmetic():
    g = make_grid(0.0, 1.0, 4, "node")
    v = VelocityField1D(np.ones(5), g)
    assert np.allclose(courant(v, 0.5), 2.0)  # tau*v/h = 0.5/0.25


def test_courant_zero_velocity():
    g = make_grid(0.0, 1.0, 4, "node")
    C = courant(VelocityField1D(np.zeros(5), g), 0.5)
    assert np.all(C == 0.0)
    assert np.all(cplus(C) == 0.0) and np.all(cminus(C) == 0.0)


def test_courant_sine_benchmark_magnitude():
    # half-step Courant number of the sign-changing sine benchmark
    g = make_grid(-np.pi / 2, 2 * np.pi, 40, "node")
    v = VelocityField1D(np.sin(g.coords), g)
    C = courant(v, 0.6)
    assert np.max(np.abs(C)) == pytest.approx(3.81, abs=0.02)


def test_split_identities():
    rng = np.random.default_rng(0)
    C = rng.normal(size=50)
    assert np.allclose(cplus(C) + cminus(C), C)
    assert np.all(cplus(C) * cminus(C) == 0.0)


def test_single_expanding_crossing():
    g = make_grid(0.0, 1.0, 2, "node")
    v = VelocityField1D(np.array([-1.0, 0.0, 1.0]), g)
    # nodal zero: not a crossing
    assert find_zero_crossings(v) == []
    v = VelocityField1D(np.array([-1.0, 1.0, 1.0]), g)
    (c,) = find_zero_crossings(v)
    assert c.kind == "expanding"
    assert c.location == pytest.approx(0.25)  # halfway between nodes 0 and 1


def test_sine_crossing_classification():
    g = make_grid(-np.pi / 2, 2 * np.pi, 41, "node")  # avoid nodes exactly at 0, pi
    v = VelocityField1D(np.sin(g.coords), g)
    crossings = find_zero_crossings(v)
    assert len(crossings) == 2
    kinds = {c.kind: c.location for c in crossings}
    assert kinds["expanding"] == pytest.approx(0.0, abs=g.h)
    assert kinds["converging"] == pytest.approx(np.pi, abs=g.h)


def test_no_crossing_for_positive_velocity():
    g = make_grid(-2.0, 14.0, 20, "node")
    v = VelocityField1D(2.0 + np.sin(g.coords), g)
    assert find_zero_crossings(v) == []


def test_crossing_count_matches_brute_scan():
    rng = np.random.default_rng(42)
    g = make_grid(0.0, 1.0, 30, "node")
    for _ in range(200):
        s = rng.normal(size=31)
        s[rng.random(31) < 0.1] = 0.0  # sprinkle exact zeros
        v = VelocityField1D(s, g)
        crossings = find_zero_crossings(v)
        brute = sum(1 for i in range(30) if s[i] * s[i + 1] < 0.0)
        assert len(crossings) == brute
        for c in crossings:
            # the interpolant really vanishes at the reported location
            w = s[c.left_index] + (c.location - g.coords[c.left_index]) * (
                s[c.left_index + 1] - s[c.left_index]) / g.h
            assert abs(w) <= 1e-12 * np.max(np.abs(s))
            assert g.coords[c.left_index] < c.location < g.coords[c.left_index + 1]


def test_freeze_time_independent():
    g = make_grid(0.0, 2.0, 10, "node")
    f = freeze_midtime(lambda x, t: np.cos(x), 0.3, 0.1, g)
    assert np.array_equal(f.samples, np.cos(g.coords))


def test_freeze_zero_factor():
    # cos(pi/2) rounds to ~6e-17 in binary64, so "zero" means a few ulps
    g = make_grid(0.0, 1.0, 6, "node")
    f = freeze_midtime(lambda x, t: np.cos(np.pi * t) * (1 + x), 0.25, 0.5, g)
    assert np.allclose(f.samples, 0.0, atol=5e-16)


def test_freeze_deformation_field_first_step():
    # first frozen sample of the time-reversing swirl: factor cos(0.005 pi)
    g = make_grid(0.0, 1.0, 8, "node")
    v1 = lambda x, t: -4 * np.cos(np.pi * t) * np.sin(2 * np.pi * x) ** 2 * 0.25
    f = freeze_midtime(v1, 0.0, 0.01, g)
    expected = np.cos(0.005 * np.pi) * (-4 * np.sin(2 * np.pi * g.coords) ** 2 * 0.25)
    assert np.allclose(f.samples, expected, rtol=1e-15)
