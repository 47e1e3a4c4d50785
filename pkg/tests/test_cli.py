import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from shockspec import __version__
from shockspec.cli import main, parse_grid
from shockspec.errors import MalformedInput
from shockspec.io import fixture_names, fixture_path, fmt, load_model, model_from_dict, model_to_dict
from shockspec.scenarios import HOPF_OVERCOMPRESSIVE

HOPF_S1 = 6.217387779275928


def _run(tmp_path, *argv):
    return main([str(a) for a in argv])


def test_fixtures_load():
    names = fixture_names()
    assert {"lax_diagonal", "overcompressive_unstable", "jump_example", "tangent"} <= set(names)
    for name in names:
        data = json.load(open(fixture_path(name)))
        assert data["description"]
        if name != "tangent":
            load_model(fixture_path(name))


def test_model_roundtrip():
    model, het = load_model(fixture_path("bifurcation"))
    d = model_to_dict(model, het)
    model2, het2 = model_from_dict(json.loads(json.dumps(d)))
    np.testing.assert_array_equal(het2.points[1], het.points[1])
    assert fmt(0.1) == "0.1" and fmt(float("nan")) == "nan"


def test_flat_q_accepted():
    d = json.load(open(fixture_path("lax_diagonal")))
    d["pieces"][0]["Q"] = ["-1", "0", "0", "1"]
    model, _ = model_from_dict(d)
    np.testing.assert_array_equal(model.pieces[0].Q, np.diag([-1.0, 1.0]))


def test_malformed_location():
    d = json.load(open(fixture_path("lax_diagonal")))
    d["pieces"][1]["Q"][0][1] = "abc"
    with pytest.raises(MalformedInput) as info:
        model_from_dict(d, "m.json")
    assert "m.json.pieces[1].Q[0][1]" in str(info.value)


def test_analyze_stable(tmp_path):
    out = tmp_path / "r.json"
    assert _run(tmp_path, "analyze", "--model", fixture_path("lax_diagonal"), "--out", out) == 0
    r = json.loads(out.read_text())
    assert r["verdict"] == "stable" and r["roots"] == [] and r["total_winding"] == 0
    assert r["zero_multiplicity"] == 1 and r["version"] == __version__ and len(r["config_sha256"]) == 64


def test_analyze_unstable(tmp_path):
    out = tmp_path / "r.json"
    assert _run(tmp_path, "analyze", "--model", fixture_path("overcompressive_unstable"), "--out", out) == 2
    r = json.loads(out.read_text())
    assert r["verdict"] == "unstable" and len(r["roots"]) == 1
    assert r["roots"][0]["lambda"][1] == 0 and r["roots"][0]["lambda"][0] > 0


def test_analyze_three_region(tmp_path):
    out = tmp_path / "r.json"
    assert _run(tmp_path, "analyze", "--model", "bifurcation_unstable", "--radius", "1", "--out", out) == 2
    r = json.loads(out.read_text())
    assert r["roots"][0]["lambda"][0] == pytest.approx(1.2489e-4, rel=1e-3)


def test_analyze_errors(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert _run(tmp_path, "analyze", "--model", fixture_path("tangent"), "--out", out) == 64
    assert "Transversality" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text('{"dimension": 2, "pieces": [{"Q": [["1", "0"], ["0", "x"]], "u_star": ["0", "-1"]}],'
                   ' "interfaces": [], "crossings": []}')
    assert _run(tmp_path, "analyze", "--model", bad, "--out", out) == 64
    assert "pieces[0].Q[1][1]" in capsys.readouterr().err
    bad.write_text("{")
    assert _run(tmp_path, "analyze", "--model", bad, "--out", out) == 64
    assert "bad.json:1:2" in capsys.readouterr().err
    assert _run(tmp_path, "analyze", "--model", fixture_path("lax_diagonal"), "--delta", "0", "--out", out) == 64
    with pytest.raises(SystemExit) as info:
        main(["analyze", "--out", str(out)])
    assert info.value.code == 64


def test_parse_grid():
    np.testing.assert_allclose(parse_grid("0:1:3"), [0, 0.5, 1])
    np.testing.assert_allclose(parse_grid("1e-1:1e-3:3:log"), [1e-1, 1e-2, 1e-3])


def _read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0] == f"# shockspec {__version__}" and lines[1].startswith("# config_sha256 ")
    return list(csv.DictReader(lines[2:]))


def test_scan_hopf(tmp_path):
    out = tmp_path / "s.csv"
    s0 = HOPF_OVERCOMPRESSIVE.s0
    grid = f"{s0 + 1.2}:{s0 + 2.2}:6"
    assert _run(tmp_path, "scan", "--scenario", "overcompressive-hopf", "--var", "s", "--grid", grid,
                "--out", out) == 0
    rows = _read_csv(out)
    grid_rows = [r for r in rows if r["kind"] == "grid"]
    cross = [r for r in rows if r["kind"] == "crossing"]
    assert len(grid_rows) == 6 and len(cross) == 1
    assert abs(float(cross[0]["lead_re"])) <= 1e-6 and float(cross[0]["lead_im"]) > 0
    assert float(cross[0]["param"]) == pytest.approx(HOPF_S1, abs=1e-7)
    assert "\r" not in out.read_text()


def test_scan_eps(tmp_path):
    out = tmp_path / "s.csv"
    assert _run(tmp_path, "scan", "--scenario", "bifurcation-unstable", "--var", "eps",
                "--grid", "1e-1:1e-4:4:log", "--out", out) == 0
    ratio = [float(r["lead_re_over_param"]) for r in _read_csv(out)]
    err = np.abs(np.array(ratio) - 0.125)
    assert np.all(np.diff(err) < 0) and err[-1] < 1e-4


def test_scan_scenario_file(tmp_path):
    scen = tmp_path / "scen.json"
    scen.write_text(json.dumps({"family": "bifurcation", "params": {
        "nu_m": -1, "kappa_m": 1, "kappa_x": 1, "nu_x": -1, "kappa_p": -1, "nu_p": -2, "chi_state": -3}}))
    out = tmp_path / "s.csv"
    assert _run(tmp_path, "scan", "--scenario", scen, "--var", "eps", "--grid", "0:1e-2:2", "--out", out) == 0
    rows = _read_csv(out)
    assert rows[0]["flags"] == "split" and rows[1]["n_unstable"] == "1"


def test_scan_errors(tmp_path):
    out = tmp_path / "s.csv"
    assert _run(tmp_path, "scan", "--scenario", "bifurcation", "--var", "eps", "--grid", "0:1:0", "--out", out) == 64
    assert _run(tmp_path, "scan", "--scenario", "bifurcation", "--var", "s", "--grid", "0:1:3", "--out", out) == 64
    assert _run(tmp_path, "scan", "--scenario", "nope", "--var", "s", "--grid", "0:1:3", "--out", out) == 64
    assert _run(tmp_path, "scan", "--scenario", "bifurcation", "--var", "eps", "--grid", "1:1:3", "--out", out) == 64


def test_scan_deterministic(tmp_path, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["scan", "--scenario", "overcompressive-hopf", "--var", "s", "--grid", "5.5:6.5:6", "--seed", "3"]
    monkeypatch.setenv("SHOCKSPEC_THREADS", "4")
    assert main(args + ["--out", str(a)]) == 0
    monkeypatch.setenv("SHOCKSPEC_THREADS", "1")
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_oracle_check(tmp_path):
    out = tmp_path / "o.json"
    assert _run(tmp_path, "oracle-check", "--model", fixture_path("jump_example"), "--crossing", 0,
                "--mu", "1e-2,1e-3,1e-4", "--out", out) == 0
    r = json.loads(out.read_text())
    assert r["status"] == "pass" and 0.8 <= r["slope"] <= 1.2
    assert _run(tmp_path, "oracle-check", "--model", "continuous_field", "--out", out) == 0
    assert json.loads(out.read_text())["status"] == "skipped: zero jump"
    assert _run(tmp_path, "oracle-check", "--model", "bifurcation", "--crossing", 0, "--mu", "1,1e-1",
                "--out", out) == 65
    assert _run(tmp_path, "oracle-check", "--model", "bifurcation", "--crossing", 5, "--out", out) == 64


def test_scenario_export(tmp_path):
    out = tmp_path / "m.json"
    assert _run(tmp_path, "scenario", "--name", "overcompressive-reference", "--s", "2", "--out", out) == 0
    model, het = load_model(out)
    np.testing.assert_allclose(het.points[0], (2.0, 0.0))
    assert _run(tmp_path, "scenario", "--name", "bifurcation", "--eps", "0", "--out", out) == 64


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.json"
    res = subprocess.run([sys.executable, "-m", "shockspec", "analyze", "--model", "lax_diagonal",
                          "--out", str(out)], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(out.read_text())["verdict"] == "stable"
