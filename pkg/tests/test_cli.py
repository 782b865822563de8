import json
import subprocess
import sys

import numpy as np
import pytest

from wignerlab import cli
from wignerlab.cli import ExperimentConfig, compare, main, read_table
from wignerlab.errors import NumericalError


def run_cli(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def data_rows(path):
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")][1:]


def test_fredholm_table(tmp_path):
    assert run_cli(tmp_path, "fredholm", "--alpha-max", "4", "--step", "0.05") == 0
    header, table = read_table(tmp_path / "fredholm.csv")
    assert header == ["alpha", "det", "p", "int_p"]
    assert table.shape == (81, 4)
    assert table[0, 0] == 0.0 and table[0, 1] == 1.0
    text = (tmp_path / "fredholm.csv").read_text()
    assert "# config_hash=" in text
    man = json.loads((tmp_path / "manifest_fredholm.json").read_text())
    assert man["status"] == "ok" and man["outputs"] and man["wall_time"] > 0


def test_gaps_deterministic(tmp_path):
    args = ["gaps", "--N", "100", "--samples", "12", "--u", "0", "--s", "1", "--delta", "0.8",
            "--seed", "7"]
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert run_cli(a, *args) == 0
    assert run_cli(b, *args) == 0
    assert run_cli(c, *args, "--workers", "2") == 0
    first = (a / "gaps.csv").read_bytes()
    assert first == (b / "gaps.csv").read_bytes() == (c / "gaps.csv").read_bytes()
    man = json.loads((a / "manifest_gaps.json").read_text())
    assert len(man["seeds"]) == 12 and len(set(man["seeds"])) == 12


def test_kernel_sweep(tmp_path):
    assert run_cli(tmp_path, "kernel", "--N", "500", "--lambda", "0.5", "--u", "0",
                   "--tau-sweep", "0.25:3:0.25") == 0
    header, table = read_table(tmp_path / "kernel.csv")
    assert table.shape[0] == 12
    assert np.all(table[:, header.index("abs_error")] < 0.05)


def test_small_commands(tmp_path):
    assert run_cli(tmp_path, "validate-law", "--law", "quartic", "--g", "0.1") == 0
    assert run_cli(tmp_path, "validate-law", "--law", "bump") == 1
    assert run_cli(tmp_path, "sample-spectrum", "--N", "20", "--samples", "2") == 0
    assert (tmp_path / "spectrum_0001.csv").exists()
    assert run_cli(tmp_path, "sc-check", "--N", "200", "--samples", "2", "--tol", "0.2") == 0
    assert len(data_rows(tmp_path / "sc_check.csv")) == 2
    assert run_cli(tmp_path, "flow", "--modes", "1:0.5", "--t", "2", "--K", "4") == 0
    _, flow = read_table(tmp_path / "flow.csv")
    assert abs(flow[1, 1] - 0.5 * np.exp(-1)) < 1e-15
    assert run_cli(tmp_path, "reverse", "--order", "3") == 0
    assert "slope=5.9" in (tmp_path / "reverse.csv").read_text()
    assert run_cli(tmp_path, "paircorr", "--N", "200", "--samples", "3", "--poisson") == 0
    assert len(data_rows(tmp_path / "paircorr.csv")) == 12


def test_input_errors(tmp_path):
    assert run_cli(tmp_path, "gaps", "--N", "50", "--samples", "1", "--u", "3") == 1
    man = json.loads((tmp_path / "manifest_gaps.json").read_text())
    assert man["status"] == "input-error"
    assert run_cli(tmp_path, "sample-spectrum", "--law", "cauchy", "--samples", "1") == 1


def test_numerical_error_exit(tmp_path, monkeypatch):
    def boom(*_):
        raise NumericalError("no convergence")

    monkeypatch.setitem(cli.COMMANDS, "fredholm", boom)
    assert run_cli(tmp_path, "fredholm") == 2
    assert json.loads((tmp_path / "manifest_fredholm.json").read_text())["status"] == \
        "numerical-error"


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == 64
    with pytest.raises(SystemExit) as e:
        main(["fredholm", "--step", "abc"])
    assert e.value.code == 64
    proc = subprocess.run([sys.executable, "-m", "wignerlab", "nope"], capture_output=True)
    assert proc.returncode == 64
    assert cli.run(ExperimentConfig("nope", {"out": str(tmp_path)})) == 64


def test_config_roundtrip_and_precedence(tmp_path):
    cfg = ExperimentConfig("gaps", {"N": 100, "samples": 3, "s": "0.5,1", "delta": 0.8,
                                    "seed": 11, "law": "quartic", "g": 0.1, "workers": 2})
    back = ExperimentConfig.from_ini(cfg.to_ini())
    assert back == cfg
    assert back.hash() == ExperimentConfig("gaps", dict(cfg.params, workers=1)).hash()
    assert back.hash() != ExperimentConfig("gaps", dict(cfg.params, seed=12)).hash()

    path = tmp_path / "exp.ini"
    path.write_text(cfg.to_ini())
    assert run_cli(tmp_path, "gaps", "--config", str(path), "--N", "60") == 0
    saved = ExperimentConfig.from_ini((tmp_path / "config_gaps.ini").read_text())
    assert saved.params["N"] == 60 and saved.params["g"] == 0.1 and saved.params["seed"] == 11
    assert run_cli(tmp_path, "fredholm", "--config", str(path)) == 1


def test_compare(tmp_path):
    t = np.column_stack([np.linspace(0, 1, 5), np.linspace(0, 1, 5) ** 2])
    rep = compare(t, t, 0.05)
    assert rep["sup_deviation"] == 0 and rep["pass"]
    off = t.copy()
    off[:, 1] += 0.1
    rep = compare(off, t, 0.05)
    assert not rep["pass"] and abs(rep["sup_deviation"] - 0.1) < 1e-12
    with pytest.raises(ValueError):
        compare(t[:4], t, 0.05)

    header = "x,value\n"
    (tmp_path / "a.csv").write_text(header + "\n".join(f"{x},{y}" for x, y in t.tolist()) + "\n")
    (tmp_path / "b.csv").write_text(header + "\n".join(f"{x},{y}" for x, y in off.tolist()) + "\n")
    (tmp_path / "c.csv").write_text(header + "0.0,1.0\n")
    assert run_cli(tmp_path, "compare", "--table", str(tmp_path / "a.csv"),
                   "--reference", str(tmp_path / "a.csv")) == 0
    assert run_cli(tmp_path, "compare", "--table", str(tmp_path / "b.csv"),
                   "--reference", str(tmp_path / "a.csv"), "--tolerance", "0.05") == 1
    rep = json.loads((tmp_path / "compare.json").read_text())
    assert abs(rep["sup_deviation"] - 0.1) < 1e-12 and rep["pass"] is False
    assert run_cli(tmp_path, "compare", "--table", str(tmp_path / "c.csv"),
                   "--reference", str(tmp_path / "a.csv")) == 1
