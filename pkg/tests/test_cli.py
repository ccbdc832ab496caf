import csv
import json
import math

import numpy as np
import pytest

from auxbound.cli import main


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


RADIAL = {"name": "radial", "n": 2, "A": [[-1, 0], [0, -1]],
          "f_terms": [{"component": 1, "coeff": 1, "exponents": [3, 0]},
                      {"component": 1, "coeff": 1, "exponents": [1, 2]},
                      {"component": 2, "coeff": 1, "exponents": [2, 1]},
                      {"component": 2, "coeff": 1, "exponents": [0, 3]}]}


def test_analyze_planar(tmp_path, capsys):
    assert main(["analyze", "--benchmark-spec", "planar_homogeneous",
                 "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "analysis.json").read_text())
    assert {"sigma", "z_hat_max"} <= set(rep)
    assert "alpha" in rep["decomposition"]
    assert (tmp_path / "manifest.json").exists()
    assert (tmp_path / "envelopes.png").exists()
    with open(tmp_path / "envelopes.csv") as fh:
        assert next(csv.reader(fh)) == ["t", "norm_G", "norm_G_minus", "norm_F"]
    assert "z_hat_max" in capsys.readouterr().out


def test_defective_matrix_exit_code(tmp_path, capsys):
    spec = write(tmp_path / "jordan.json", {"n": 2, "A": [[0, 1], [0, 0]]})
    assert main(["analyze", "--spec", spec, "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "DefectiveMatrix"


def test_missing_file_exit_code(tmp_path, capsys):
    assert main(["analyze", "--spec", str(tmp_path / "none.json"),
                 "--out", str(tmp_path / "o")]) == 1
    assert "no such file" in json.loads(capsys.readouterr().err)["error"]["message"]


def test_parse_error_exit_code(tmp_path, capsys):
    spec = tmp_path / "bad.json"
    spec.write_text("{\n  \"n\": 2,\n  \"A\": [[1, 0], [0\n")
    assert main(["analyze", "--spec", str(spec), "--out", str(tmp_path / "o")]) == 1
    assert "line" in json.loads(capsys.readouterr().err)["error"]["message"]


def test_bad_param_exit_code(tmp_path):
    assert main(["analyze", "--benchmark-spec", "vdp", "--param", "d",
                 "--out", str(tmp_path)]) == 1


def test_scalar_example_benchmark(tmp_path, capsys):
    assert main(["benchmark", "example2", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "0.618034" in out and "1.000000" in out and "1.414214" in out
    assert "PASS" in out
    rows = list(csv.DictReader(open(tmp_path / "example2.csv")))
    assert {r["quantity"] for r in rows} >= {"z_hat*", "z_s", "R"}


def test_simulate_zero_state(tmp_path):
    spec = write(tmp_path / "lin.json", {"n": 2, "A": [[-1, 0.5], [-0.5, -1]]})
    assert main(["simulate", "--spec", spec, "--x0", "0,0", "--horizon", "5",
                 "--out", str(tmp_path / "o")]) == 0
    data = np.genfromtxt(tmp_path / "o" / "trajectory.csv", delimiter=",", names=True)
    assert data.dtype.names == ("t", "norm_x", "z", "normV_z")
    assert np.all(data["norm_x"] == 0) and np.all(data["z"] == 0)


def test_simulate_bound_holds(tmp_path):
    assert main(["simulate", "--benchmark-spec", "planar_forced", "--z0", "0.4",
                 "--horizon", "30", "--out", str(tmp_path)]) == 0
    sim = json.loads((tmp_path / "simulation.json").read_text())
    assert sim["bound_holds"] is True
    assert sim["z0"] == pytest.approx(0.4)


def test_criteria_report(tmp_path):
    assert main(["criteria", "--benchmark-spec", "planar_forced", "--zhat-grid", "21",
                 "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "criteria.json").read_text())
    assert rep["stable"] == "certified"
    assert {"Z_s", "rho", "nu", "phi", "estimates"} <= set(rep)
    assert (tmp_path / "radius_profile.csv").exists()


def test_region_radial_circle(tmp_path):
    spec = write(tmp_path / "radial.json", RADIAL)
    out = tmp_path / "o"
    assert main(["region", "--spec", spec, "--angle-step", str(math.pi / 12),
                 "--radial-start", "0.3", "--radial-cap", "4", "--scan-horizon", "60",
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "region_x1_x2.csv")))
    assert len(rows) == 24
    assert all(abs(float(r["radius"]) - 1.0) < 1.5e-2 for r in rows)
    cont = json.loads((out / "containment.json").read_text())
    assert cont["results"] and all(c["passed"] for c in cont["results"])
