"""Command-line benchmark runner.

Selects a problem, scheme, mesh and blending policy, runs it, and writes
machine-readable reports: a JSON summary plus CSV series/tables.  Output is
deterministic (fixed summation order, every number serialized with 17
significant digits, no timestamps inside report files); wall-clock timing
goes to stderr only.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from . import harness
from .grid import TimeGrid, make_grid
from .problems import get_problem, problem_names
from .splitting import evolve2d


def _fmt(x) -> str:
    """17 significant digits, round-trippable."""
    return format(float(x), ".16e")


def _json_dump(obj, indent: int = 0) -> str:
    """Tiny JSON writer with fixed float formatting (json.dumps would emit
    shortest-roundtrip floats, which vary in digit count)."""
    pad = "  " * indent
    if isinstance(obj, dict):
        items = [f'{pad}  "{k}": {_json_dump(v, indent + 1).lstrip()}' for k, v in obj.items()]
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [_json_dump(v, indent + 1).lstrip() for v in obj]
        return pad + "[" + ", ".join(items) + "]"
    if isinstance(obj, bool):
        return pad + ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return pad + str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return pad + _fmt(obj)
    if obj is None:
        return pad + "null"
    return pad + '"' + str(obj) + '"'


def _write_series(path: Path, name: str, tau: float, values) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["n", "t", name])
        for n, v in enumerate(values):
            w.writerow([n, _fmt(n * tau), _fmt(v)])


def _write_field_1d(path: Path, x, values) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["i", "x", "value"])
        for i, (xi, v) in enumerate(zip(x, values)):
            w.writerow([i, _fmt(xi), _fmt(v)])


def _write_field_2d(path: Path, x, y, values) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["i", "j", "x", "y", "value"])
        for i, xi in enumerate(x):
            for j, yj in enumerate(y):
                w.writerow([i, j, _fmt(xi), _fmt(yj), _fmt(values[i, j])])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sweepadvect",
        description="Benchmark runner for the semi-implicit sweeping advection schemes.")
    p.add_argument("--problem", required=True, choices=problem_names())
    p.add_argument("--scheme", default=None, choices=["nc1", "nc2", "fv1", "fv2"],
                   help="default: fv2 for the conservative problem, nc2 otherwise")
    p.add_argument("--alpha", default="fixed:0.5",
                   help="fixed:<v> (or a bare number), courant, or field:<path.npy>")
    p.add_argument("--I", type=int, default=None, help="cells per direction")
    p.add_argument("--N", type=int, default=None, help="time steps")
    p.add_argument("--ladder", default=None,
                   help="refinement ladder 'I1:N1,I2:N2,...'; overrides --I/--N")
    p.add_argument("--init", default="gaussian", choices=["gaussian", "distance"],
                   help="initial profile of the deformation benchmark")
    p.add_argument("--emit", default="",
                   help="comma list of extra outputs: min, mass, fields")
    p.add_argument("--out", default="sweepadvect_out", help="report directory")
    p.add_argument("--optimize", action="store_true",
                   help="run the one-step blending-weight descent experiment")
    p.add_argument("--eta", type=float, default=None, help="descent learning rate")
    return p


def run(args) -> int:
    t0 = time.perf_counter()
    kwargs = {"init": args.init} if args.problem == "deform2d" else {}
    problem = get_problem(args.problem, **kwargs)
    scheme = args.scheme or ("fv2" if problem.centering == "cell" else "nc2")
    if problem.dimension == 2 and scheme.startswith("fv"):
        raise ValueError("conservative schemes are one-dimensional")
    try:
        alpha_spec = f"fixed:{float(args.alpha)}"
    except ValueError:
        alpha_spec = args.alpha
    alpha = harness.parse_alpha(alpha_spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit = {e for e in args.emit.split(",") if e}

    summary = {"problem": problem.name, "scheme": scheme, "alpha": alpha_spec}

    if args.optimize:
        if args.I is None or args.N is None or args.eta is None:
            raise ValueError("--optimize needs --I, --N and --eta")
        rec = harness.run_optimizer(problem, args.I, args.N, args.eta)
        summary.update(rec)
    elif args.ladder:
        rows = []
        for part in args.ladder.split(","):
            I, N = part.split(":")
            rows.append((int(I), int(N)))
        ladder = harness.run_ladder(problem, rows, scheme, alpha)
        with open(out / "table.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["I", "N", "error", "eoc"])
            for k, ((I, N), err) in enumerate(zip(rows, ladder["errors"])):
                w.writerow([I, N, _fmt(err), "" if k == 0 else _fmt(ladder["eocs"][k - 1])])
        summary["rows"] = [{"I": I, "N": N} for I, N in rows]
        summary["errors"] = ladder["errors"]
        summary["eocs"] = ladder["eocs"]
        summary["max_courant"] = max(r["max_courant"] for r in ladder["rows"])
    else:
        if args.I is None or args.N is None:
            raise ValueError("need --I and --N (or --ladder)")
        rec = harness.run_single(problem, args.I, args.N, scheme, alpha)
        for key in ("I", "N", "h", "tau", "max_courant", "max_courant_x", "max_courant_y",
                    "error", "metric"):
            if key in rec:
                summary[key] = rec[key]
        mass = rec["mass_series"]
        summary["mass_initial"] = mass[0]
        summary["mass_drift_max"] = float(np.max(np.abs(mass - mass[0])))
        summary["min_extreme"] = float(np.min(rec["min_series"]))
        summary["max_abs_final"] = float(np.max(np.abs(rec["final"])))
        if "min" in emit:
            _write_series(out / "min.csv", "min", rec["tau"], rec["min_series"])
        if "mass" in emit:
            _write_series(out / "mass.csv", "mass", rec["tau"], rec["mass_series"])
        if "fields" in emit:
            grid = make_grid(problem.origin, problem.length, args.I,
                             "cell" if scheme.startswith("fv") else "node")
            if problem.dimension == 1:
                for n, field in enumerate(rec["trajectory"]):
                    _write_field_1d(out / f"field_{n:05d}.csv", grid.coords, field)
            else:
                from .driver import SchemeConfig

                cfg = SchemeConfig(family="nc", order=int(scheme[2]), alpha=alpha)
                tg = TimeGrid(problem.T, args.N)
                evolve2d(problem, grid, tg, cfg,
                         on_level=lambda n, f: _write_field_2d(
                             out / f"field_{n:05d}.csv", grid.coords, grid.coords, f))

    with open(out / "summary.json", "w") as f:
        f.write(_json_dump(summary) + "\n")
    print(f"elapsed: {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
