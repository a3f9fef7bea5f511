from __future__ import annotations

import csv
import re
import subprocess
import sys

import numpy as np
import pytest

from canardkit.cli import OVERRIDES, build_parser, main
from canardkit.config import RunConfig

SEC6 = ["--theta", "0.05", "--eta", "0.176", "--epsilon", "0.005"]


def report(out, name):
    lines = (out / f"{name}.txt").read_text().splitlines()
    assert lines[0].startswith("# config-hash: ")
    return dict(ln.split(" = ", 1) for ln in lines[1:] if " = " in ln)


def test_analyze_section6(tmp_path):
    assert main(["analyze", *SEC6, "--delta", "0.7", "--out", str(tmp_path)]) == 0
    r = report(tmp_path, "analyze")
    assert float(r["P.A"]) == pytest.approx(2.7968e-7, rel=1e-3)
    assert float(r["Q.A"]) == pytest.approx(-0.1055, abs=1e-3)
    assert float(r["P.delta_star"]) == pytest.approx(0.2426879409, abs=1e-9)
    assert r["region"] == "two-folds-outside-closed-forms"
    assert r["P.criticality"] == "subcritical" and r["Q.criticality"] == "supercritical"
    assert float(r["bautin.B"]) == pytest.approx(-0.004, rel=0.15)
    assert r["dulac_no_cycles_right_of_Q"] == "True"


def test_analyze_without_folds(tmp_path):
    assert main(["analyze", "--theta", "0.9", "--eta", "0.9", "--epsilon", "0.01", "--out", str(tmp_path)]) == 0
    r = report(tmp_path, "analyze")
    assert r["region"] == "fewer-than-two-folds"
    assert r["canard_analysis"].startswith("skipped")
    assert "P.A" not in r


def test_missing_epsilon(tmp_path, capsys):
    assert main(["analyze", "--theta", "0.05", "--eta", "0.176", "--out", str(tmp_path)]) == 2
    assert "epsilon" in capsys.readouterr().err


def test_simulate_relaxation(tmp_path):
    args = ["simulate", *SEC6, "--delta", "0.4", "--u0", "0.3", "--v0", "0.2", "--t-end", "3000"]
    assert main([*args, "--out", str(tmp_path)]) == 0
    r = report(tmp_path, "cycle")
    assert r["kind"] == "relaxation" and r["stability"] == "stable"
    assert float(r["hausdorff_to_singular"]) < 0.05
    rows = list(csv.reader(ln for ln in open(tmp_path / "orbit.csv") if not ln.startswith("#")))
    assert rows[0] == ["t", "u", "v"] and len(rows) > 10


def test_simulate_from_e1_is_constant(tmp_path):
    args = ["simulate", *SEC6, "--delta", "0.4", "--u0", "1", "--v0", "0", "--t-end", "100"]
    assert main([*args, "--out", str(tmp_path)]) == 0
    data = np.loadtxt(tmp_path / "orbit.csv", delimiter=",", comments="#", skiprows=2)
    assert np.all(data[:, 1] == 1.0) and np.all(data[:, 2] == 0.0)


def test_simulate_rejects_negative_start(tmp_path):
    args = ["simulate", *SEC6, "--delta", "0.4", "--u0", "-1", "--v0", "0.2"]
    assert main([*args, "--out", str(tmp_path)]) == 2


def test_sweep(tmp_path):
    args = ["sweep", *SEC6, "--step", "0.05", "--refine-levels", "8", "--delta-max", "0.9"]
    assert main([*args, "--out", str(tmp_path)]) == 0
    r = report(tmp_path, "sweep")
    assert r["warning"].startswith("delta_max 0.9 clamped")
    lo, hi = (float(x) for x in r["stable_cycle_branch"].strip("()").split(","))
    assert lo == pytest.approx(0.24268, abs=2e-3)
    assert hi == pytest.approx(0.62, abs=2e-3)
    side = (tmp_path / "diagram.meta.txt").read_text()
    assert side.startswith("# config-hash: ") and "delta_H_P = " in side


def test_sweep_step_zero(tmp_path):
    assert main(["sweep", *SEC6, "--step", "0", "--out", str(tmp_path)]) == 2


def test_singular_orbit(tmp_path):
    assert main(["singular-orbit", *SEC6, "--points-per-segment", "20", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(ln for ln in open(tmp_path / "singular_orbit.csv") if not ln.startswith("#")))
    assert len(rows) == 80
    tags = [r["segment"] for r in rows]
    assert tags[::20] == ["l1", "c_r", "l2", "c_l"]
    pts = np.array([[float(r["u"]), float(r["v"])] for r in rows])
    assert np.allclose(pts[0], pts[-1], atol=1e-12)
    for k in range(3):
        assert np.allclose(pts[20 * k + 19], pts[20 * (k + 1)], atol=1e-12)


def test_singular_orbit_one_fold(tmp_path, capsys):
    assert main(["singular-orbit", "--theta", "0.9", "--eta", "0.9", "--epsilon", "0.01", "--out", str(tmp_path)]) == 2
    assert "singular orbit undefined" in capsys.readouterr().err


def test_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["singular-orbit", *SEC6, "--out", str(blocker / "sub")]) == 4


def test_config_file_and_override(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[model]\ntheta = 0.05\neta = 0.176\nepsilon = 0.01\n")
    assert main(["singular-orbit", "--config", str(ini), "--epsilon", "0.005", "--out", str(tmp_path)]) == 0
    assert main(["analyze", "--config", str(tmp_path / "missing.ini"), "--out", str(tmp_path)]) == 4


def test_deterministic_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        main(["simulate", *SEC6, "--delta", "0.4", "--u0", "0.3", "--v0", "0.2", "--t-end", "500", "--out", str(out)])
    for name in ("orbit.csv", "cycle.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_help_lists_defaults():
    defaults = RunConfig()
    for entries in OVERRIDES.values():
        for flag, sec, opt, text in entries:
            value = getattr(getattr(defaults, sec), opt)
            if value is None:
                continue
            shown = re.search(r"\(default (\S+)\)", text).group(1)
            if isinstance(value, bool):
                assert shown == str(value).lower(), flag
            elif isinstance(value, (int, float)):
                assert float(shown) == value, flag
            else:
                assert shown == value, flag
    assert "analyze" in build_parser().format_help()


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "canardkit.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "singular-orbit" in proc.stdout
