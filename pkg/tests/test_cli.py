import csv
import json

import pytest

from qcontrol.cli import build_parser, main, parse_sweep, run
from qcontrol.errors import ConfigError
from qcontrol.io import output_files

SMALL = ["--n", "32", "--steps", "128"]


def read_json(path):
    return json.loads(path.read_text())


def test_simulate(tmp_path):
    code, manifest = run(["simulate", *SMALL, "--out", str(tmp_path)])
    assert code == 0 and manifest["verdicts"] == {"mass_conservation": True}
    norms = read_json(tmp_path / "norms.json")
    assert norms["mass_drift"] < 1e-10 and "picard" in norms
    assert (tmp_path / "trajectory" / "index.json").exists()
    assert {"norm_series.csv", "norm_series.svg", "cutoff.qcf", "spectrum_final.csv"} <= set(manifest["files"])


def test_hum(tmp_path):
    code, manifest = run(["hum", *SMALL, "--out", str(tmp_path)])
    assert code == 0
    sol = read_json(tmp_path / "hum_solution.json")
    assert sol["relative_terminal_residual"] < 1e-3
    assert set(manifest["files"]) == set(output_files(tmp_path))


def test_hum_with_zero_target(tmp_path):
    code, _ = run(["hum", *SMALL, "--u0-kind", "zero", "--out", str(tmp_path)])
    sol = read_json(tmp_path / "hum_solution.json")
    assert code == 0 and sol["terminal_residual"] == 0.0 and sol["cg_iterations"] == 0


def test_nlcontrol(tmp_path):
    code, manifest = run(["nlcontrol", "--u0-kind", "random", "--out", str(tmp_path)])
    assert code == 0 and manifest["verdicts"]["nonlinear_null_control"]
    with open(tmp_path / "iterate_history.csv") as fh:
        header = next(csv.reader(fh))
    assert header == ["k", "increment", "contraction_factor", "claim1_ratio", "claim2_ratio"]


def test_nlcontrol_outside_smallness(tmp_path, capsys):
    code, manifest = run(["nlcontrol", "--u0-norm", "0.2", "--out", str(tmp_path)])
    assert code == 3 and manifest is None
    assert "smallness" in capsys.readouterr().err


def test_observe_sweep(tmp_path):
    code, manifest = run(["observe", "--n", "32", "--radius-sweep", "1:3:1", "--out", str(tmp_path)])
    assert code == 0 and manifest["verdicts"] == {"positive": True, "non_increasing": True}
    with open(tmp_path / "observability.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["R"]) for r in rows] == [1.0, 2.0, 3.0]
    assert all(r["lanczos_iters"] == "0" for r in rows)


def test_observe_sweep_overflow(tmp_path):
    code, _ = run(["observe", "--n", "32", "--radius-sweep", "1:5:1", "--out", str(tmp_path)])
    assert code == 2


def test_diag_single(tmp_path):
    code, manifest = run(["diag", "conservation", "--out", str(tmp_path)])
    assert code == 0
    report = read_json(tmp_path / "conservation.json")
    assert report["label"] == "c28" and report["verdict"] == "pass"
    assert "summary.csv" not in manifest["files"]


def test_diag_all_summary(tmp_path):
    code, _ = run(["diag", "all", "--seed", "42", "--sweep", "4", "--out", str(tmp_path)])
    assert code == 0
    with open(tmp_path / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    labels = [r["label"] for r in rows]
    assert labels == ["c26", "c27", "c28", "item_i", "item_ii", "sobolev", "c3", "App1"]
    assert all(r["verdict"] == "pass" for r in rows)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[grid]\nn = 32\n[run]\nseed = 5\n")
    code, manifest = run(["simulate", "--config", str(cfg), "--seed", "6", "--out", str(tmp_path / "o")])
    assert code == 0
    assert manifest["config"]["n"] == 32 and manifest["config"]["seed"] == 6


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("n = 32\nradius = 7.0\n")
    assert main(["hum", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "radius" in capsys.readouterr().err


def test_bad_flag_value_exit_code(tmp_path):
    assert main(["hum", "--n", "48", "--out", str(tmp_path)]) == 2


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["simulate", *SMALL, "--out", str(blocker / "sub")]) == 5


def test_parse_sweep():
    assert parse_sweep("1:2:0.5") == [1.0, 1.5, 2.0]
    with pytest.raises(ConfigError):
        parse_sweep("1:2")
    with pytest.raises(ConfigError):
        parse_sweep("2:1:0.5")


def test_help_lists_exit_codes():
    text = build_parser().format_help()
    assert "exit codes" in text and "QCONTROL_THREADS" in text
