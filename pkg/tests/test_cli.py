import json
import subprocess
import sys

import pytest

from cubefpp.cli import main


def test_analytic(capsys):
    assert main(["analytic", "--n", "10"]) == 0
    out = capsys.readouterr()
    assert "a_expected" in out.out and "warning" not in out.err


def test_analytic_off_theta_warns(capsys):
    assert main(["analytic", "--n", "3", "--u", "0.5"]) == 0
    assert "oracle-validated range only" in capsys.readouterr().err


def test_fpp_writes_files(tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["fpp", "--n", "6", "--trials", "20", "--seed", "3", "--out", str(out), "--covering"]) == 0
    assert (tmp_path / "r_trials.csv").exists() and (tmp_path / "r_summary.csv").exists()
    assert "covering_time" in capsys.readouterr().out


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "walk", "n": 5, "trials": 10, "seed": 4}))
    assert main(["walk", "--config", str(cfg), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out.split("\n}\n")[0] + "\n}")
    assert doc["config"]["n"] == 5 and doc["seed"] == 4
    assert main(["fpp", "--config", str(cfg)]) == 2


@pytest.mark.parametrize("argv", [["fpp", "--n", "6", "--trials", "0"], ["fpp", "--n", "31"],
                                  ["btp", "--n", "3", "--horizon", "-1"], ["fpp", "--config", "/nonexistent"]])
def test_usage_errors(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as e:
        code = e.code
    assert code == 2


def test_resource_cap(capsys):
    assert main(["btp", "--n", "10", "--horizon", "2", "--trials", "1", "--max-particles", "100"]) == 3


def test_verify_exit_codes(capsys):
    assert main(["verify", "--quick"]) == 0
    assert main(["verify", "--quick", "--inject-negative"]) == 1
    assert "FAIL fpp" in capsys.readouterr().out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "cubefpp", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "0.1.0"
