import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from sweepadvect.cli import main


def run_cli(args):
    return subprocess.run([sys.executable, "-m", "sweepadvect.cli", *args],
                          capture_output=True, text=True)


def test_usage_error_exits_2():
    r = run_cli(["--problem", "not-a-problem"])
    assert r.returncode == 2


def test_missing_mesh_exits_1(tmp_path):
    assert main(["--problem", "sine1d", "--out", str(tmp_path)]) == 1


def test_single_run_outputs(tmp_path):
    code = main(["--problem", "sine1d", "--I", "40", "--N", "1", "--scheme", "nc2",
                 "--alpha", "0.5", "--emit", "min,mass", "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["problem"] == "sine1d"
    assert summary["max_courant"] == pytest.approx(3.8197, abs=1e-3)
    assert (tmp_path / "min.csv").exists()
    mass = (tmp_path / "mass.csv").read_text().splitlines()
    assert mass[0] == "n,t,mass"
    assert len(mass) == 3  # header + levels 0..1


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["--problem", "cons1d", "--I", "40", "--N", "2", "--scheme", "fv2",
                     "--alpha", "0.5", "--emit", "mass", "--out", str(out)]) == 0
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    assert (a / "mass.csv").read_bytes() == (b / "mass.csv").read_bytes()


def test_numbers_have_17_significant_digits(tmp_path):
    assert main(["--problem", "sine1d", "--I", "20", "--N", "1", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "summary.json").read_text()
    # every float is rendered as d.16-digits e+-xx
    import re

    floats = re.findall(r"-?\d\.\d+e[+-]\d+", text)
    assert floats and all(len(f.split(".")[1].split("e")[0]) == 16 for f in floats)


def test_ladder_table(tmp_path):
    assert main(["--problem", "sine1d", "--scheme", "nc2", "--alpha", "courant",
                 "--ladder", "40:1,80:2", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "table.csv").read_text().splitlines()
    assert rows[0] == "I,N,error,eoc"
    assert len(rows) == 3
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert len(summary["errors"]) == 2 and len(summary["eocs"]) == 1
    assert summary["eocs"][0] > 2.0


def test_field_dumps_1d(tmp_path):
    assert main(["--problem", "opt1d", "--I", "10", "--N", "2", "--emit", "fields",
                 "--out", str(tmp_path)]) == 0
    dumps = sorted(tmp_path.glob("field_*.csv"))
    assert len(dumps) == 3
    header = dumps[0].read_text().splitlines()[0]
    assert header == "i,x,value"


def test_optimize_run(tmp_path):
    assert main(["--problem", "opt1d", "--I", "30", "--N", "10", "--optimize",
                 "--eta", "50", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["J_after"] < summary["J_before"]


def test_fv_scheme_rejected_for_2d(tmp_path):
    assert main(["--problem", "diag2d", "--scheme", "fv2", "--I", "10", "--N", "1",
                 "--out", str(tmp_path)]) == 1
