import json
import math
import subprocess
import sys

import pytest

from oppenheim_lab.acceptance import B4_DICT, DETERMINISM_CONFIGS
from oppenheim_lab.cli import main, table_drift
from oppenheim_lab.experiments import EXPERIMENTS
from oppenheim_lab.output import Table, read_output, render

PAIRCORR = {"basis": [[1, 0], [0, 1]], "a": 0.1, "b": 1.1, "T": 1e4, "flux": [0.4142135623730951, 0.7320508075688772]}


def write_config(tmp_path, experiment, params, **extra):
    p = tmp_path / f"{experiment}.config.json"
    p.write_text(json.dumps({"experiment": experiment, "parameters": params, **extra}))
    return p


def run(*argv):
    return main(list(argv))


def test_run_paircorr_csv_with_config_echo(tmp_path, capsys):
    cfg = write_config(tmp_path, "paircorr", PAIRCORR, seed=4)
    out = tmp_path / "pc.csv"
    assert run("run", "--config", str(cfg), "--output", str(out)) == 0
    text = out.read_text()
    assert text.startswith("# config: ")
    config, table = read_output(out)
    assert config["experiment"] == "paircorr" and config["seed"] == 4
    assert config["parameters"]["a"] == 0.1 and config["output"]["format"] == "csv"
    assert table.rows


def test_experiment_flag_supplies_name(tmp_path):
    cfg = tmp_path / "params.json"
    cfg.write_text(json.dumps({"parameters": DETERMINISM_CONFIGS["siegel"]}))
    out = tmp_path / "s.json"
    assert run("run", "--experiment", "siegel", "--config", str(cfg), "--output", str(out)) == 0
    config, _ = read_output(out)
    assert config["experiment"] == "siegel" and config["output"]["format"] == "json"


def test_reruns_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path, "asymptotic", DETERMINISM_CONFIGS["asymptotic"], seed=7)
    out = tmp_path / "a.csv"
    blobs = []
    for threads in ("1", "3"):
        assert run("run", "--config", str(cfg), "--output", str(out), "--threads", threads) == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]
    assert run("run", "--config", str(cfg), "--output", str(out), "--seed", "8") == 0
    assert out.read_bytes() != blobs[0]


def test_bad_interval_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, "paircorr", {**PAIRCORR, "a": 2.0, "b": 1.0})
    assert run("run", "--config", str(cfg), "--output", str(tmp_path / "x.csv")) == 2
    assert "interval" in capsys.readouterr().err
    assert not (tmp_path / "x.csv").exists()


def test_unknown_key_and_wrong_type(tmp_path, capsys):
    cfg = write_config(tmp_path, "paircorr", {**PAIRCORR, "colour": 1})
    assert run("run", "--config", str(cfg)) == 2
    assert "colour" in capsys.readouterr().err
    cfg = write_config(tmp_path, "paircorr", {**PAIRCORR, "T": "large"})
    assert run("run", "--config", str(cfg)) == 2
    assert "parameters.T" in capsys.readouterr().err
    cfg.write_text(json.dumps({"experiment": "paircorr", "parameters": PAIRCORR, "extra": 1}))
    assert run("run", "--config", str(cfg)) == 2
    assert "extra" in capsys.readouterr().err


def test_missing_or_broken_config(tmp_path, capsys):
    assert run("run", "--config", str(tmp_path / "nope.json")) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("run", "--config", str(bad)) == 2
    cfg = write_config(tmp_path, "paircorr", PAIRCORR)
    assert run("run", "--config", str(cfg), "--experiment", "siegel") == 2


def test_enumeration_cap_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, "quasinull-growth", {"T_grid": [10, 100], "form": B4_DICT})
    assert run("run", "--config", str(cfg), "--output", str(tmp_path / "q.csv")) == 3
    assert "cap" in capsys.readouterr().err


@pytest.mark.slow
@pytest.mark.parametrize("experiment", sorted(EXPERIMENTS))
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_output_round_trip(tmp_path, experiment, fmt):
    cfg = write_config(tmp_path, experiment, DETERMINISM_CONFIGS[experiment], seed=99)
    out = tmp_path / f"out.{fmt}"
    assert run("run", "--config", str(cfg), "--output", str(out), "--threads", "2") == 0
    data = out.read_bytes()
    config, table = read_output(out)
    assert config["experiment"] == experiment and config["seed"] == 99
    # re-rendering the parsed artifact reproduces every byte, so all floats survive exactly
    assert render(config, table, fmt) == data


def test_table_drift_detection():
    a = Table(["x", "y"], [[1, 0.5], [2, float("nan")]], {"k": 1.0})
    assert table_drift(a, Table(["x", "y"], [[1, 0.5 * (1 + 1e-12)], [2, float("nan")]], {"k": 1.0})) == []
    assert table_drift(a, Table(["x", "y"], [[1, 0.6], [2, float("nan")]], {"k": 1.0}))
    assert table_drift(a, Table(["x", "z"], a.rows, a.summary))
    assert table_drift(a, Table(["x", "y"], a.rows, {"k": 2.0}))


def test_verify_passes_and_detects_drift(tmp_path, capsys):
    assert run("verify", "--suite", "quick", "--only", "6", "--emit", str(tmp_path)) == 0
    (day,) = [p for p in tmp_path.iterdir() if p.is_dir()]
    golden = day / "criterion_06.csv"
    assert golden.exists()
    assert run("verify", "--suite", "quick", "--only", "6", "--golden", str(day)) == 0
    lines = golden.read_text().splitlines()
    # corrupt one numeric cell
    header = lines.index(next(l for l in lines if not l.startswith("#")))
    cells = lines[header + 1].split(",")
    cells[-1] = "12345.0"
    lines[header + 1] = ",".join(cells)
    golden.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert run("verify", "--suite", "quick", "--only", "6", "--golden", str(day)) == 1
    assert "[DRIFT]" in capsys.readouterr().out
    golden.unlink()
    assert run("verify", "--suite", "quick", "--only", "6", "--golden", str(day)) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "oppenheim_lab", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "verify" in res.stdout
