import json
import subprocess
import sys

import pytest

from ccscen.cli import main


def _json(capsys, argv):
    assert main(argv + ["--format", "json"]) == 0
    return json.loads(capsys.readouterr().out)


def test_sizes(capsys):
    assert main(["sizes", "--eps", "0.05", "--beta", "0.01", "--dim", "10"]) == 0
    assert capsys.readouterr().out.strip() == "371"
    out = _json(capsys, ["sizes", "--eps", "4.6857e-4", "--beta", "0.01", "--dim", "10", "--fast"])
    assert out == {"n1": 200, "n2": 9826, "total": 10026}


def test_ddata_table_row(capsys):
    assert main(["ddata", "--n", "10", "--alpha", "0.05", "--dim", "10", "--generator", "pointmass"]) == 0
    out = capsys.readouterr().out.split()
    assert out == ["d_data", "5.2383", "delta_epsilon", "4.6857e-04", "N_so", "40081", "N_fast", "10026"]
    js = _json(capsys, ["ddata", "--n", "5", "--dim", "10", "--generator", "sphere"])
    assert js["variant"] == "sphere" and abs(js["d_data"] - 11.0368) < 2e-2


def test_translate(capsys):
    js = _json(capsys, ["translate", "--eps", "0.05", "--n", "80", "--alpha", "0.05", "--dim", "10"])
    assert abs(js["lambda"] - 18.307038 / 80) < 1e-6
    assert js["rule"] == "closed-form" and js["delta_epsilon"] > 0


def test_np_example(capsys):
    assert main(["np-example", "--p0", "stdnormal", "--delta", "0.05"]) == 0
    assert capsys.readouterr().out.strip() == "0.2595"


def test_calibrate(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("1,2\n3,4\n")
    js = _json(capsys, ["calibrate", "--data", str(p)])
    assert js["theta_hat"] == [2.0, 3.0] and js["n"] == 2


def test_run_and_output(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"problem": "single-linear", "d": 3, "n": 40}))
    argv = ["run", "--config", str(cfg), "--trials", "2", "--out", str(tmp_path / "o.csv")]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    assert (tmp_path / "o.csv").read_text() == first
    js = _json(capsys, ["run", "--config", str(cfg), "--trials", "1"])
    assert js["trials"] == 1


@pytest.mark.parametrize("argv", [[], ["bogus"], ["sizes", "--eps", "0.1"], ["sizes", "--eps", "x", "--beta", "0.1",
                                                                             "--dim", "2"]])
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    assert "usage" in capsys.readouterr().err


def test_runtime_errors(tmp_path, capsys):
    assert main(["sizes", "--eps", "2", "--beta", "0.1", "--dim", "1"]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    assert "missing.json" in capsys.readouterr().err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ccscen", "sizes", "--eps", "0.1", "--beta", "0.01", "--dim", "5"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "113"
