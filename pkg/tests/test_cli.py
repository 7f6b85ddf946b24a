import csv
import io
import json
import math

import numpy as np
import pytest

from alloy_rem.cli import main, parse_config
from alloy_rem.errors import ConfigError
from alloy_rem.phase import beta_circ
from alloy_rem.model import ModelParams


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_classify_z1(capsys):
    code, out, _ = run(capsys, "classify", "--a", "1", "--sigma", "2")
    d = json.loads(out)
    assert code == 0
    assert d["zone"] == "Z1"
    assert d["beta_plus"] == pytest.approx(math.sqrt(2) / 2, abs=1e-5)


def test_classify_boundary(capsys):
    code, out, _ = run(capsys, "classify", "--a", "0", "--sigma", "1")
    assert code == 2
    assert json.loads(out)["zone"] == "Boundary"


def test_classify_z4(capsys):
    code, out, _ = run(capsys, "classify", "--a", "-3", "--sigma", "2")
    d = json.loads(out)
    assert (code, d["zone"]) == (0, "Z4")
    assert d["beta_plus"] == pytest.approx(math.sqrt(2), rel=1e-12)


@pytest.mark.parametrize("argv", [["classify", "--a", "1"],
                                  ["classify", "--a", "x", "--sigma", "1"],
                                  ["classify", "--a", "1", "--sigma", "-1"],
                                  ["nonsense"], []])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as e:
        code = main(argv)
        raise SystemExit(code)
    assert e.value.code == 64


def test_phase_diagram_full(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    code, _, _ = run(capsys, "phase-diagram", "--a-range", "-4", "4", "--sigma-range", "0.1", "3",
                     "--steps", "200", "--out", str(out))
    assert code == 0
    rows = csv_rows(out.read_text())
    assert len(rows) == 40000
    assert list(rows[0]) == ["a", "sigma", "zone", "beta_plus", "beta_clt",
                             "beta_stable_threshold", "stable_alpha_formula"]
    zones = {r["zone"] for r in rows}
    assert {"Z1", "Z2", "Z3", "Z4", "Z5", "Z6"} <= zones


def test_phase_diagram_small_and_sigma_one(capsys):
    code, out, _ = run(capsys, "phase-diagram", "--a-range", "0", "1", "--sigma-range", "1", "2",
                       "--steps", "2")
    assert code == 0 and len(csv_rows(out)) == 4
    code, out, _ = run(capsys, "phase-diagram", "--a-range", "-3", "3", "--sigma-range", "0.5",
                       "1.5", "--steps", "21")
    ones = [r for r in csv_rows(out) if float(r["sigma"]) == 1.0]
    assert len(ones) == 21
    assert {r["zone"] for r in ones} <= {"Boundary", "Z1", "Z4"}


def test_phase_diagram_bad_steps(capsys):
    code, _, _ = run(capsys, "phase-diagram", "--steps", "1")
    assert code == 64


def test_phase_diagram_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "phase-diagram", "--steps", "2",
                       "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 74 and "I/O" in err


def test_free_energy_classical(capsys):
    code, out, _ = run(capsys, "free-energy", "--a", "0", "--sigma", "1", "--steps", "50")
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 50
    for r in rows:
        assert float(r["P1"]) == float(r["P2"]) == float(r["P"])


def test_free_energy_switch_and_convexity(capsys):
    code, out, _ = run(capsys, "free-energy", "--a", "0.2", "--sigma", "0.5",
                       "--beta-range", "0.05", "3", "--steps", "300")
    rows = csv_rows(out)
    b = np.array([float(r["beta"]) for r in rows])
    p1v = np.array([float(r["P1"]) for r in rows])
    p2v = np.array([float(r["P2"]) for r in rows])
    pv = np.array([float(r["P"]) for r in rows])
    assert np.array_equal(pv, np.maximum(p1v, p2v))
    branch = p2v > p1v
    switches = np.flatnonzero(branch[1:] != branch[:-1])
    assert switches.size == 1
    i = switches[0]
    assert b[i] < 8 / 15 < b[i + 1]
    assert beta_circ(ModelParams(0.2, 0.5)) == pytest.approx(8 / 15, rel=1e-12)
    assert np.all(np.diff(pv, 2) >= -1e-9)


def test_free_energy_bad_range(capsys):
    code, _, _ = run(capsys, "free-energy", "--a", "0", "--sigma", "1", "--beta-range", "0", "1")
    assert code == 64


CFG = """# demo
a = 0
sigma = 1
beta = {beta}
n_values = {n}
replicas = {reps}
seed = 7
statistic = {stat}
"""


def write_cfg(tmp_path, name="c.cfg", **kw):
    f = tmp_path / name
    f.write_text(CFG.format(**kw))
    return str(f)


def test_parse_config():
    cfg = parse_config("a=1\nsigma = 2 # comment\nbeta=0.5\nn_values=8, 9\n"
                       "replicas=3\nseed=0x10\nstatistic=LLNRatio\n")
    assert cfg["n_values"] == [8, 9] and cfg["seed"] == 16 and cfg["workers"] is None
    for bad in ("a=1\na=2", "bogus=1", "a 1", "a=1", "a=x\nsigma=1\nbeta=1\nn_values=1\n"
                "replicas=1\nseed=1\nstatistic=LLNRatio", "a=1\nsigma=1\nbeta=1\nn_values=1\n"
                "replicas=1\nseed=1\nstatistic=Other"):
        with pytest.raises(ConfigError):
            parse_config(bad)


def test_simulate_lln(tmp_path, capsys):
    path = write_cfg(tmp_path, beta=0.4, n=14, reps=500, stat="LLNRatio")
    report, table = tmp_path / "r.json", tmp_path / "v.csv"
    code, _, _ = run(capsys, "simulate", path, "--report", str(report), "--csv", str(table))
    assert code == 0
    d = json.loads(report.read_text())
    v = d["results"]["14"]["verdict"]
    assert v["verdict"] == "PASS" and 0.99 <= v["mean"] <= 1.01
    assert len(csv_rows(table.read_text())) == 500


def test_simulate_deterministic(tmp_path, capsys):
    path = write_cfg(tmp_path, beta=1.1, n="8,9", reps=40, stat="StableNormalized")
    outs = []
    for i, w in enumerate((1, 3)):
        f = tmp_path / f"r{i}.json"
        assert run(capsys, "simulate", path, "--report", str(f), "--workers", str(w))[0] == 0
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]


def test_simulate_exit_codes(tmp_path, capsys):
    assert run(capsys, "simulate", str(tmp_path / "none.cfg"))[0] == 65
    bad = tmp_path / "bad.cfg"
    bad.write_text("a = 1\n")
    assert run(capsys, "simulate", str(bad))[0] == 65
    mismatch = write_cfg(tmp_path, "m.cfg", beta=2.0, n=8, reps=4, stat="CLTNormalized")
    assert run(capsys, "simulate", mismatch)[0] == 3
    budget = write_cfg(tmp_path, "b.cfg", beta=1.0, n=25, reps=1, stat="LLNRatio")
    assert run(capsys, "simulate", budget)[0] == 4


@pytest.mark.slow
def test_simulate_stable_classical(tmp_path, capsys):
    # spec example: Hill near sqrt(2)/2 at beta = 2
    path = write_cfg(tmp_path, beta=2.0, n=16, reps=4000, stat="StableNormalized")
    code, out, _ = run(capsys, "simulate", path)
    h = json.loads(out)["results"]["16"]["verdict"]["hill"]["estimate"]
    assert code == 0
    assert h == pytest.approx(math.sqrt(2) / 2, abs=0.15)


def test_verify_unknown_suite(capsys):
    with pytest.raises(SystemExit) as e:
        main(["verify", "nope"])
    assert e.value.code == 64


def test_verify_phase(capsys):
    code, out, err = run(capsys, "verify", "phase")
    assert code == 0
    assert "[PASS] C7" in err
    assert json.loads(out)["passed"] is True
