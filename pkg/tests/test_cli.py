import copy
import json
import subprocess
import sys
from importlib import resources

import pytest

from loglinear.cli import EXIT_ERROR, EXIT_OK, EXIT_UNSAFE, main

BASE = json.loads(resources.files("loglinear.scenarios").joinpath("small.json").read_text())


def quick(**overrides):
    """A short, cheap variant of the bundled small scenario."""
    d = copy.deepcopy(BASE)
    d["name"] = "quick"
    d["waypoints"] = d["waypoints"][:3]
    d["simulation"].update(t_end=2.0, dt=5e-3)
    d["invariant"]["n_samp"] = 300
    d["flowpipe"].update(window=1.0, n_dirs=64, sweep_steps=8)
    d["monte_carlo"].update(runs=4, dt=0.02)
    d["obstacles"] = []
    d.update(overrides)
    return d


@pytest.fixture
def write(tmp_path):
    def _write(data, name="s.json"):
        p = tmp_path / name
        p.write_text(json.dumps(data))
        return str(p)

    return _write


def run(*args):
    return main([str(a) for a in args])


def test_simulate_outputs(tmp_path, write):
    out = tmp_path / "o"
    assert run("simulate", "--scenario", write(quick()), "--out", out) == EXIT_OK
    for f in ("trace.csv", "simulate.json", "simulate.svg"):
        assert (out / f).exists()
    summary = json.loads((out / "simulate.json").read_text())
    assert summary["max_deviation"] < 1e-6
    assert (out / "simulate.svg").read_text().startswith("<svg")


def test_simulate_dt_halving(tmp_path, write):
    s = write(quick())
    run("simulate", "--scenario", s, "--out", tmp_path / "a", "--dt", 0.02)
    run("simulate", "--scenario", s, "--out", tmp_path / "b", "--dt", 0.01)
    a = json.loads((tmp_path / "a" / "simulate.json").read_text())["max_deviation"]
    b = json.loads((tmp_path / "b" / "simulate.json").read_text())["max_deviation"]
    assert 12 < a / b < 24


def test_empty_waypoints_is_schema_error(tmp_path, write, capsys):
    assert run("simulate", "--scenario", write(quick(waypoints=[])), "--out", tmp_path) == EXIT_ERROR
    assert "error" in capsys.readouterr().err


def test_missing_referenced_file(tmp_path, write):
    assert run("simulate", "--scenario", write(quick(waypoints="nowhere.json")), "--out", tmp_path) == EXIT_ERROR
    assert run("simulate", "--scenario", tmp_path / "absent.json") == EXIT_ERROR


def test_waypoints_from_file(tmp_path, write):
    (tmp_path / "wp.json").write_text(json.dumps(BASE["waypoints"][:3]))
    assert run("simulate", "--scenario", write(quick(waypoints="wp.json")), "--out", tmp_path / "o") == EXIT_OK


def test_bad_dt(tmp_path, write):
    assert run("simulate", "--scenario", write(quick()), "--out", tmp_path, "--dt", -1) == EXIT_ERROR


def test_invariant_outputs(tmp_path, write):
    out = tmp_path / "o"
    assert run("invariant", "--scenario", write(quick()), "--out", out) == EXIT_OK
    d = json.loads((out / "invariant.json").read_text())
    assert set(d) >= {"K", "inversion", "no_inversion", "saturation", "axis_ratio"}
    assert d["inversion"]["iterations"] <= 10
    assert len(d["inversion"]["P"]) == 9
    assert (out / "invariant.svg").exists()


def test_zero_disturbance_invariant_is_capped(tmp_path, write):
    dist = dict(BASE["disturbance"], amplitude=[0.0, 0.0, 0.0])
    out = tmp_path / "o"
    assert run("invariant", "--scenario", write(quick(disturbance=dist)), "--out", out) == EXIT_OK
    d = json.loads((out / "invariant.json").read_text())
    assert d["inversion"]["iterations"] == 1
    assert max(d["inversion"]["semi_axes"]) < 1e-3


def test_flowpipe_and_verify_deterministic(tmp_path, write):
    s = write(quick())
    for k in ("a", "b"):
        assert run("flowpipe", "--scenario", s, "--out", tmp_path / k) == EXIT_OK
        assert run("simulate", "--scenario", s, "--out", tmp_path / k) == EXIT_OK
        assert run("verify", "--scenario", s, "--out", tmp_path / k) == EXIT_OK
    for f in ("flowpipe.json", "trace.csv", "simulate.json", "report.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    d = json.loads((tmp_path / "a" / "flowpipe.json").read_text())
    assert d["containment_fraction"] == 1.0
    assert json.loads((tmp_path / "a" / "report.json").read_text())["verdict"] == "SAFE"


def test_seed_override_changes_monte_carlo(tmp_path, write):
    s = write(quick())
    run("flowpipe", "--scenario", s, "--out", tmp_path / "a", "--seed", 1)
    run("flowpipe", "--scenario", s, "--out", tmp_path / "b", "--seed", 2)
    assert (tmp_path / "a" / "flowpipe.svg").read_bytes() != (tmp_path / "b" / "flowpipe.svg").read_bytes()


def test_verify_unsafe_exit(tmp_path, write):
    obstacle = {"name": "block", "xmin": 30.0, "xmax": 40.0, "ymin": -2.0, "ymax": 2.0}
    out = tmp_path / "o"
    assert run("verify", "--scenario", write(quick(obstacles=[obstacle])), "--out", out) == EXIT_UNSAFE
    rep = json.loads((out / "report.json").read_text())
    assert rep["verdict"] == "UNSAFE" and rep["collisions"][0]["name"] == "block"


def test_log_level_env(tmp_path, write, monkeypatch, capfd):
    import logging

    monkeypatch.setenv("LOGLINEAR_LOG_LEVEL", "INFO")
    root = logging.getLogger()
    saved = root.handlers[:], root.level
    root.handlers = []
    try:
        run("verify", "--scenario", write(quick()), "--out", tmp_path)
        assert "INFO loglinear" in capfd.readouterr().err
    finally:
        root.handlers, _ = saved
        root.setLevel(saved[1])


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "loglinear.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd in ("simulate", "invariant", "flowpipe", "verify"):
        assert cmd in r.stdout
