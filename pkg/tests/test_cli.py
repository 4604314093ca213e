import csv
import json
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from conelab import cli
from conelab.cli import COMMANDS, RunConfig, combine_residues, load_config, run
from conelab.errors import ConfigInvalid

SMALL = {
    "schema_version": 1,
    "name": "small",
    "form": [1, 1, -1, 0, 0, 0],
    "L": 1,
    "gamma": [0, 0, 0],
    "weight": {"kind": "radial-bump", "center": [0, 0, 0], "radius": 1.0, "symmetric": True},
    "B_grid": [50, 100, 200, 400],
    "primes": [2, 3, 5],
    "q_values": [1, 3, 9],
    "c_vectors": [[1, 0, 1], [2, 1, 1]],
    "X": 200,
    "truncation": {"u_max": 256, "x_max": 1000, "P": 50},
    "quadrature": {"method": "leray", "samples": 100000},
}
CONIC = dict(SMALL, form=[0, 0, -1, 1, 0, 0],
             weight={"kind": "box-bump", "center": [1, 1, 1], "extents": [0.5, 0.5, 0.5], "symmetric": True})


def _write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


@pytest.mark.parametrize("command", [c for c in COMMANDS if c not in ("verify", "conic")])
def test_every_command_runs(tmp_path, command, capsys):
    cfg = _write(tmp_path, SMALL)
    assert run([command, "--config", cfg, "--out", str(tmp_path / "out")]) == 0
    report = json.loads((tmp_path / "out" / f"{command}.json").read_text())
    assert report["command"] == command and report["config"]["form"] == SMALL["form"]
    assert set(report["versions"]) >= {"conelab", "numpy", "python"}
    assert "total" in json.loads((tmp_path / "out" / f"{command}.timings.json").read_text())
    assert command in capsys.readouterr().out


def test_conic_command(tmp_path):
    cfg = _write(tmp_path, CONIC)
    assert run(["conic", "--config", cfg, "--out", str(tmp_path), "--csv"]) == 0
    rows = list(csv.reader(open(tmp_path / "conic.csv")))
    assert rows[0] == ["B", "count"] and len(rows) == 5


def test_conic_asymmetric_weight_is_config_error(tmp_path):
    data = dict(CONIC, weight=dict(CONIC["weight"], symmetric=False))
    with pytest.raises(Exception):
        run(["conic", "--config", _write(tmp_path, data)])


def test_verify_bundled_pythagorean(tmp_path):
    assert run(["verify", "--config", "pythagorean", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["result"]["passed"] is True
    assert all(c["passed"] for c in report["result"]["checks"])


def test_probe_bundled_obstruction(tmp_path):
    assert run(["probe", "--config", "obstruction", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "probe.json").read_text())
    assert report["result"]["verdict"] == "obstructed"
    assert report["config"]["residues"] == {"2": [1, 1, 1], "3": [2, 2, 2]}


def test_bad_gamma_exit_2(tmp_path, capsys):
    cfg = _write(tmp_path, dict(SMALL, L=3, gamma=[1, 1, 1]))
    assert run(["count", "--config", cfg]) == 2
    assert "not 0 mod L" in capsys.readouterr().err


@pytest.mark.parametrize("patch", [{"B_grid": [100, 50, 200, 400]}, {"primes": [4]}, {"form": [1, 1, 0, 0, 0, 0]},
                                   {"weight": {"kind": "radial-bump", "center": [0, 0, 0], "radius": -1}},
                                   {"schema_version": 2}, {"colour": "blue"}, {"threads": 0}])
def test_invalid_configs_exit_2(tmp_path, patch):
    assert run(["count", "--config", _write(tmp_path, dict(SMALL, **patch))]) == 2


def test_missing_config_exit_2(tmp_path):
    assert run(["count", "--config", str(tmp_path / "nope.json")]) == 2


def test_budget_exit_3(tmp_path):
    assert run(["count", "--config", _write(tmp_path, SMALL), "--budget", "10"]) == 3


def test_invariant_failure_exit_4(tmp_path, monkeypatch):
    monkeypatch.setitem(cli.HANDLERS, "verify", lambda cfg, timings: {"passed": False, "checks": []})
    assert run(["verify", "--config", _write(tmp_path, SMALL), "--out", str(tmp_path)]) == 4
    assert json.loads((tmp_path / "verify.json").read_text())["result"]["passed"] is False


def test_reports_byte_identical(tmp_path):
    cfg = _write(tmp_path, SMALL)
    for d in ("a", "b"):
        assert run(["fit", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "fit.json").read_bytes() == (tmp_path / "b" / "fit.json").read_bytes()


def test_csv_and_solutions(tmp_path):
    cfg = _write(tmp_path, SMALL)
    assert run(["count-primitive", "--config", cfg, "--out", str(tmp_path), "--csv", "--solutions"]) == 0
    rows = list(csv.reader(open(tmp_path / "count-primitive.solutions.csv")))
    assert rows[0] == ["x1", "x2", "x3"]
    pts = [tuple(map(int, r)) for r in rows[1:]]
    assert (3, 4, 5) in pts and all(x * x + y * y == z * z for x, y, z in pts)
    assert list(csv.reader(open(tmp_path / "count-primitive.csv")))[0] == ["B", "count"]


def test_flags_override_config(tmp_path):
    cfg = _write(tmp_path, SMALL)
    assert run(["count", "--config", cfg, "--out", str(tmp_path), "--threads", "2", "--seed", "7"]) == 0
    report = json.loads((tmp_path / "count.json").read_text())
    assert report["threads"] == 2 and report["seed"] == 7


def test_prints_report_without_out(capsys):
    assert run(["density", "--config", "pythagorean"]) == 0
    assert json.loads(capsys.readouterr().out)["command"] == "density"


def test_combine_residues():
    assert combine_residues({"2": [1, 1, 1], "3": [2, 2, 2]}) == (6, (5, 5, 5))
    with pytest.raises(ConfigInvalid):
        combine_residues({"2": [1, 1, 1], "4": [1, 1, 1]})


def test_bundled_configs_load():
    assert load_config("pythagorean").form == (1, 1, -1, 0, 0, 0)
    ob = load_config("obstruction")
    assert (ob.L, ob.gamma) == (6, (5, 5, 5))
    assert RunConfig.from_dict(ob.to_dict()) == ob


@settings(max_examples=30)
@given(st.lists(st.integers(1, 10**6), min_size=4, max_size=8, unique=True), st.integers(0, 2**32),
       st.integers(1, 8), st.sampled_from([(1, (0, 0, 0)), (3, (0, 1, 1)), (6, (3, 4, 5))]))
def test_config_round_trip(grid, seed, threads, cond):
    data = dict(SMALL, B_grid=sorted(grid), seed=seed, threads=threads, L=cond[0], gamma=list(cond[1]))
    cfg = RunConfig.from_dict(data)
    again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "conelab", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "probe" in out.stdout
