import hashlib
import json

import pytest

from legtrainer.cli import main


def _error(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    return json.loads(err[0])


def test_validate_default(capsys):
    assert main(["validate", "--config", "default"]) == 0
    assert capsys.readouterr().out.strip() == "valid"


def test_simulate_writes_everything(tmp_path):
    cfg = tmp_path / "paper.cfg"
    cfg.write_text("l1 = 0.18\nl2 = 0.90\nl3 = 0.45\nl4 = 0.36\n")
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--csv", "--svg"]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"manifest.txt", "log.csv", "angles.svg", "velocities.svg", "torque.svg", "trace.svg"} <= names


def test_csv_only(tmp_path):
    assert main(["torque", "--out", str(tmp_path), "--csv"]) == 0
    assert not list(tmp_path.glob("*.svg"))


def test_sweep_outputs(tmp_path):
    assert main(["sweep", "--out", str(tmp_path), "--cycles", "2"]) == 0
    assert {p.name for p in tmp_path.glob("*.svg")} == {"angles.svg", "velocities.svg", "trace.svg"}
    assert "cycles = 2" in (tmp_path / "manifest.txt").read_text()


def test_unassemblable_is_input_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("coupler_fraction = 1.0\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    rec = _error(capsys)
    assert rec["error"] == "input" and "crank cannot complete revolution" in rec["message"]
    assert not (tmp_path / "o").exists()


def test_config_syntax_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("l1 = -1\n")
    assert main(["validate", "--config", str(cfg)]) == 1
    assert _error(capsys)["line"] == 1


def test_missing_config(capsys):
    assert main(["validate", "--config", "/nonexistent/x.cfg"]) == 1
    assert "cannot read" in _error(capsys)["message"]


def test_bad_cycles(capsys, tmp_path):
    assert main(["simulate", "--cycles", "0", "--out", str(tmp_path)]) == 1
    _error(capsys)


def test_runtime_failure(tmp_path, capsys):
    cfg = tmp_path / "stiff.cfg"
    cfg.write_text("kp = 1e6\nkv = 2e3\ndt = 0.01\ninitial_q1 = 0.6\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    rec = _error(capsys)
    assert rec["error"] == "runtime" and isinstance(rec["step"], int)


@pytest.mark.parametrize("command", ["simulate", "sweep", "torque"])
def test_manifest_rerun_bit_identical(tmp_path, command):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("dt = 0.004\nmass.6 = 1.2\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([command, "--config", str(cfg), "--out", str(a), "--csv"]) == 0
    manifest = (a / "manifest.txt").read_text()
    assert "# defaults applied:" in manifest and "# config sha256: " + hashlib.sha256(cfg.read_bytes()).hexdigest() in manifest
    assert main([command, "--config", str(a / "manifest.txt"), "--out", str(b), "--csv"]) == 0
    assert (a / "log.csv").read_bytes() == (b / "log.csv").read_bytes()
