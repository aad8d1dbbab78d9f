"""Experiment runners shared by the command-line tool and the acceptance
suite: single runs, refinement ladders, and the descent experiment, each
returning plain dictionaries of results."""

from __future__ import annotations

import numpy as np

from .analysis import eoc, final_error, global_error, mass_series, min_series
from .driver import SchemeConfig, solve
from .grid import Grid1D, TimeGrid, Trajectory, make_grid, sample2d
from .nonconservative import AlphaPolicy
from .optimizer import optimize_once
from .problems import BenchmarkProblem, ErrorTable, get_problem
from .splitting import evolve2d
from .velocity import courant, freeze_midtime


def parse_alpha(spec: str) -> AlphaPolicy:
    """Parse the CLI alpha syntax: fixed:<v>, courant, or field:<npy path>."""
    if spec == "courant":
        return AlphaPolicy.courant_rule()
    if spec.startswith("fixed:"):
        return AlphaPolicy.fixed(float(spec.split(":", 1)[1]))
    if spec.startswith("field:"):
        return AlphaPolicy.field(np.load(spec.split(":", 1)[1]))
    raise ValueError(f"cannot parse alpha spec {spec!r}")


def _exact_full(problem: BenchmarkProblem):
    if problem.exact is not None:
        return problem.exact
    return None


def _final_reference(problem: BenchmarkProblem):
    if problem.exact_final is not None:
        return problem.exact_final
    if problem.exact is not None:
        if problem.dimension == 1:
            return lambda x: problem.exact(x, problem.T)
        return lambda x, y: problem.exact(x, y, problem.T)
    return None


def run_1d(problem: BenchmarkProblem, I: int, N: int, scheme: str = "nc2",
           alpha: AlphaPolicy | str = "fixed:0.5", keep_trajectory: bool = True) -> dict:
    """One 1D run.

    Problems flagged "embedded2d" follow their reference runs, which pushed
    the 1D problem through the split 2D solver on a square domain with a
    vanishing second velocity component.  That is equivalent to 2N half
    steps of the 1D scheme (each y substep is the identity), with the global
    error carrying the 2D weight: every one of the I+1 identical grid rows
    contributes, so E_2d = (L + h) * E_row exactly.
    """
    if isinstance(alpha, str):
        alpha = parse_alpha(alpha)
    config = SchemeConfig.from_name(scheme, alpha)
    centering = "cell" if config.family == "fv" else "node"
    grid = make_grid(problem.origin, problem.length, I, centering)
    embedded = problem.time_protocol == "embedded2d" and config.family == "nc"
    tgrid = TimeGrid(problem.T, N)
    run_tgrid = TimeGrid(problem.T, 2 * N) if embedded else tgrid

    vfield = freeze_midtime(problem.velocity, 0.0, run_tgrid.tau, grid)
    max_c = float(np.max(np.abs(courant(vfield, run_tgrid.tau))))

    traj = solve(problem, grid, run_tgrid, config)
    if embedded:
        traj = traj.subsample(2, tgrid)

    record = {
        "problem": problem.name, "scheme": scheme, "I": I, "N": N,
        "h": grid.h, "tau": tgrid.tau, "step_tau": run_tgrid.tau,
        "max_courant": max_c,
        "min_series": min_series(traj), "mass_series": mass_series(traj),
        "metric": problem.error_metric,
    }
    if problem.error_metric == "global" and problem.exact is not None:
        record["error"] = global_error(traj, problem.exact)
        if embedded:
            record["error"] *= problem.length + grid.h
    else:
        ref = _final_reference(problem)
        if ref is not None:
            record["error"] = final_error(traj, lambda x, t: ref(x))
    if keep_trajectory:
        record["trajectory"] = traj
    record["final"] = traj.final
    return record


def _max_courant_2d(problem: BenchmarkProblem, grid: Grid1D, tgrid: TimeGrid) -> tuple[float, float]:
    """Largest Courant numbers seen by the x (half-step) and y substeps."""
    v1, v2 = problem.velocity
    X, Y = np.meshgrid(grid.coords, grid.coords, indexing="ij")
    steps = range(tgrid.N) if problem.velocity_time_dependent else (0,)
    m1 = m2 = 0.0
    for n in steps:
        tf = tgrid.midpoint(n)
        m1 = max(m1, float(np.max(np.abs(v1(X, Y, tf)))))
        m2 = max(m2, float(np.max(np.abs(v2(X, Y, tf)))))
    return 0.5 * tgrid.tau * m1 / grid.h, tgrid.tau * m2 / grid.h


def run_2d(problem: BenchmarkProblem, I: int, N: int, alpha: AlphaPolicy | str = "fixed:0.5",
           order: int = 2, keep_final: bool = True) -> dict:
    """One split 2D run with streaming diagnostics (nothing retained per level
    beyond the minimum, the discrete mass, and the running error sum)."""
    if isinstance(alpha, str):
        alpha = parse_alpha(alpha)
    config = SchemeConfig(family="nc", order=order, alpha=alpha)
    grid = make_grid(problem.origin, problem.length, I, "node")
    tgrid = TimeGrid(problem.T, N)
    exact = _exact_full(problem)
    X, Y = np.meshgrid(grid.coords, grid.coords, indexing="ij")

    mins: list[float] = []
    masses: list[float] = []
    err_sum = 0.0

    def on_level(n, field):
        nonlocal err_sum
        mins.append(float(np.min(field)))
        masses.append(grid.h ** 2 * float(np.sum(field)))
        if exact is not None:
            err_sum += float(np.sum(np.abs(field - exact(X, Y, tgrid.t(n)))))

    final = evolve2d(problem, grid, tgrid, config, on_level=on_level)
    cx, cy = _max_courant_2d(problem, grid, tgrid)
    record = {
        "problem": problem.name, "scheme": f"nc{order}", "I": I, "N": N,
        "h": grid.h, "tau": tgrid.tau,
        "max_courant_x": cx, "max_courant_y": cy, "max_courant": max(cx, cy),
        "min_series": np.array(mins), "mass_series": np.array(masses),
        "metric": problem.error_metric,
    }
    if problem.error_metric == "global" and exact is not None:
        record["error"] = grid.h ** 2 * tgrid.tau * err_sum
    else:
        ref = _final_reference(problem)
        if ref is not None:
            record["error"] = grid.h ** 2 * float(np.sum(np.abs(final - ref(X, Y))))
    if keep_final:
        record["final"] = final
    return record


def run_single(problem: BenchmarkProblem, I: int, N: int, scheme: str = "nc2",
               alpha: AlphaPolicy | str = "fixed:0.5", **kwargs) -> dict:
    if problem.dimension == 2:
        if scheme.startswith("fv"):
            raise ValueError("conservative schemes are 1D only")
        return run_2d(problem, I, N, alpha, order=int(scheme[2]), **kwargs)
    return run_1d(problem, I, N, scheme, alpha, **kwargs)


def run_ladder(problem: BenchmarkProblem, rows: list[tuple[int, int]], scheme: str = "nc2",
               alpha: AlphaPolicy | str = "fixed:0.5") -> dict:
    """Run a refinement ladder and chain the convergence orders."""
    records = []
    for I, N in rows:
        kwargs = {"keep_trajectory": False} if problem.dimension == 1 else {"keep_final": False}
        records.append(run_single(problem, I, N, scheme, alpha, **kwargs))
    errors = [r["error"] for r in records]
    eocs = [eoc(errors[k], errors[k + 1]) for k in range(len(errors) - 1)]
    return {"rows": records, "errors": errors, "eocs": eocs}


def run_table(problem: BenchmarkProblem, table: ErrorTable) -> dict:
    ladder = run_ladder(problem, [(I, N) for I, N, _ in table.rows], table.scheme, table.alpha)
    ladder["expected_errors"] = table.expected()
    ladder["expected_eocs"] = list(table.eocs)
    ladder["half_ulps"] = table.half_ulps()
    return ladder


def run_optimizer(problem: BenchmarkProblem, I: int, N: int, eta: float) -> dict:
    grid = make_grid(problem.origin, problem.length, I, "node")
    tgrid = TimeGrid(problem.T, N)
    report = optimize_once(problem, grid, tgrid, eta)
    return {
        "problem": problem.name, "I": I, "N": N, "eta": eta,
        "J_before": report.J_before, "J_after": report.J_after,
        "E_before": report.E_before, "E_after": report.E_after,
        "J_after_clamped": report.J_after_clamped, "E_after_clamped": report.E_after_clamped,
    }
