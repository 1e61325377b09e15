import json
import subprocess
import sys

import pytest

from mimorelay.harness.cli import main


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "rate-vs-snr" in out and "ee-vs-L" in out


def test_unknown_experiment_is_validation_error(capsys):
    assert main(["fig99"]) == 1
    assert "unknown experiment" in capsys.readouterr().err


def test_bad_flag_is_validation_error():
    with pytest.raises(SystemExit) as exc:
        main(["rate-vs-snr", "--trials", "many"])
    assert exc.value.code == 1


def test_bad_config_is_validation_error(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('experiment = "rate-vs-snr"\nK = 5\nL = 12\n')
    assert main(["rate-vs-snr", "--config", str(cfg)]) == 1
    assert "2K" in capsys.readouterr().err


def test_config_experiment_mismatch(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('experiment = "ee-surface"\n')
    assert main(["rate-vs-snr", "--config", str(cfg)]) == 1


def test_missing_config_file(tmp_path):
    assert main(["rate-vs-snr", "--config", str(tmp_path / "nope.toml")]) == 1


def test_runtime_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    # without circuit power the EE optimum runs off to P_s -> 0
    cfg.write_text('experiment = "ee-surface"\nP_0 = 0.0\nP_const = 0.0\nP_APS = 0.0\n')
    assert main(["ee-surface", "--config", str(cfg), "--out", str(tmp_path / "s.csv")]) == 2
    assert "OptimizerFailure" in capsys.readouterr().err


def test_unwritable_output_exit_code(tmp_path, capsys):
    out = tmp_path / "missing" / "x.csv"
    assert main(["green-points", "--out", str(out)]) == 2
    assert "missing" in capsys.readouterr().err


def test_json_output_carries_seed(tmp_path):
    out = tmp_path / "g.json"
    assert main(["green-points", "--seed", "987654321", "--format", "json", "--out", str(out)]) == 0
    meta = json.loads(out.read_text())["metadata"]
    assert meta["seed"] == 987654321 and meta["experiment"] == "green-points"


def test_config_overrides(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('experiment = "rate-vs-snr"\nN = 32\nK = 2\nP_s_dB = [0, 10]\ntrials = 50\n')
    out = tmp_path / "r.csv"
    assert main(["rate-vs-snr", "--config", str(cfg), "--trials", "5", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "experiment,N,P_s_dB,P_r_dB,metric,value,stderr,method"
    assert len(lines) == 1 + 3 * 2


def test_workers_give_identical_bytes(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('experiment = "rate-vs-snr"\nN = [32, 64]\nK = 3\nP_s_dB = [-5, 5, 15]\ntrials = 60\n')
    outs = []
    for workers in (1, 8):
        out = tmp_path / f"w{workers}.csv"
        assert main(["rate-vs-snr", "--config", str(cfg), "--workers", str(workers), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_same_seed_same_bytes(tmp_path):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    args = ["coherence-time", "--trials", "20"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert main(args + ["--seed", "1", "--out", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "mimorelay.harness.cli", "list"], capture_output=True, text=True)
    assert res.returncode == 0 and "green-points" in res.stdout
