import csv
import json
import subprocess
import sys

import pytest

from ppot.cli import RunConfig, main, parse_config_text


def run_cli(*args):
    return main([str(a) for a in args])


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_dim_example(tmp_path, capsys):
    assert run_cli("dim", "--N", 4, "--theta", "1/2", "--d", 2, "--out", tmp_path) == 0
    assert capsys.readouterr().out.strip() == "12"
    assert json.loads((tmp_path / "dim.json").read_text())["rows"][0]["dim"] == 12


def test_vapprox_circle(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("domain = circle 1\nweight = unit\ntheta = 1/2\nN = 100\ngrid = points 0.5 2\nmethod = bergman\n")
    assert run_cli("vapprox", "--config", cfg, "--out", tmp_path / "o") == 0
    rows = read_csv(tmp_path / "o" / "vapprox.csv")
    assert rows[0] == ["x_re", "x_im", "value", "method", "N", "theta"]
    assert abs(float(rows[1][2]) - (-0.3466)) <= 0.02
    assert abs(float(rows[2][2]) - 0.6931) <= 0.02


def test_phi_example(tmp_path, capsys):
    assert run_cli("phi", "--domain", "interval -1 1", "--N", 2, "--z", 2, "--out", tmp_path) == 0
    out = json.loads((tmp_path / "phi.json").read_text())
    assert out["rows"][0]["value"] == pytest.approx(7, abs=1e-6)
    assert (tmp_path / "phi_poly.txt").read_text().strip()
    assert read_csv(tmp_path / "phi_mesh.csv")[0] == ["x", "weighted_value"]


def test_quadrature_csv_columns(tmp_path):
    assert run_cli("basis", "--domain", "interval -1 1", "--N", 3, "--out", tmp_path) == 0
    rows = read_csv(tmp_path / "quadrature.csv")
    assert rows[0] == ["x_re", "x_im", "weight"]
    assert sum(float(r[2]) for r in rows[1:]) == pytest.approx(2, abs=1e-14)
    assert (tmp_path / "basis.txt").read_text().startswith("# basis")


def test_invalid_input_exits_one(tmp_path, capsys):
    assert run_cli("vapprox", "--domain", "plane", "--weight", "unit", "--N", 5, "--grid", "points 1",
                   "--out", tmp_path) == 1
    assert "error" in capsys.readouterr().err
    assert run_cli("dim", "--theta", "3/2", "--N", 4, "--out", tmp_path) == 1
    assert run_cli("vapprox", "--domain", "circle 1", "--out", tmp_path) == 1


def test_config_diagnostics_name_the_line(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("domain = circle 1\nfoo = 3\n")
    assert run_cli("dim", "--config", bad) == 1
    assert "bad.cfg:2" in capsys.readouterr().err
    with pytest.raises(ValueError, match="x.cfg:1"):
        parse_config_text("N = four\n", RunConfig(), "x.cfg")


def test_numerical_failure_exits_two(tmp_path, capsys):
    code = run_cli("phi", "--domain", "interval -1 1", "--theta", "1/3", "--N", 80, "--z", 2, "--out", tmp_path)
    assert code == 2
    assert "numerical failure" in capsys.readouterr().out


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nN = 4\ntheta = 0\n")
    assert run_cli("dim", "--config", cfg, "--theta", "1/2", "--out", tmp_path) == 0
    assert capsys.readouterr().out.strip() == "3"


def test_outputs_are_deterministic(tmp_path):
    args = ["vapprox", "--domain", "interval -1 1", "--N", 12, "--theta", "1/3", "--grid", "line -2 2 9",
            "--method", "lp"]
    assert run_cli(*args, "--out", tmp_path / "a") == 0
    assert run_cli(*args, "--out", tmp_path / "b") == 0
    assert (tmp_path / "a" / "vapprox.csv").read_bytes() == (tmp_path / "b" / "vapprox.csv").read_bytes()


def test_config_echo_reproduces_run(tmp_path):
    assert run_cli("bm", "--domain", "circle 1", "--N_list", "5, 10", "--theta", "1/2", "--out", tmp_path / "a") == 0
    echo = tmp_path / "a" / "config.txt"
    assert "N_list = 5, 10" in echo.read_text()
    assert run_cli("bm", "--config", echo, "--out", tmp_path / "b") == 0
    assert (tmp_path / "a" / "bm.csv").read_bytes() == (tmp_path / "b" / "bm.csv").read_bytes()


def test_console_script(tmp_path):
    res = subprocess.run([sys.executable, "-m", "ppot.cli", "dim", "--N", "4", "--theta", "1/2", "--d", "2",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "12"
