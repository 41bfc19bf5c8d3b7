"""Command-line interface: outputs, exit codes and config replay."""

import json

import pytest

from strausslab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_exponents_report(capsys):
    code, out, _ = run(capsys, "exponents", "--n", "8", "--p", "9/5")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    prof = doc["profile"]
    assert prof["s_c"] == {"num": 3, "den": 2} and prof["case"] == "C1"
    assert doc["config"]["p"] == "9/5" and doc["schema"] == "strausslab.report/1"


@pytest.mark.parametrize("argv", [
    ("exponents", "--n", "10", "--p", "5/2"),     # inside the smoothness gap
    ("exponents", "--n", "8", "--p", "1"),        # not energy supercritical
    ("verify", "--suite", "nope"),
    ("simulate", "--n", "6", "--p", "3"),         # no measured constants for eps=auto
    ("scan", "--p-values", "1", "2"),
])
def test_configuration_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_bad_rational_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["exponents", "--n", "8", "--p", "nine"])
    assert exc.value.code == 2


def test_range_command(capsys):
    code, out, _ = run(capsys, "range", "--n", "10")
    doc = json.loads(out)
    assert code == 0 and len(doc["range"]["intervals"]) == 2


def test_verify_is_byte_identical_and_replayable(capsys, tmp_path):
    code, out1, _ = run(capsys, "verify", "--suite", "propagator")
    code, out2, _ = run(capsys, "verify", "--suite", "propagator")
    assert code == 0 and out2 == out1
    first = tmp_path / "a.json"
    first.write_text(out1)
    # the emitted report is itself a valid config, with or without the command name
    code, out3, _ = run(capsys, "--config", str(first))
    assert code == 0 and out3 == out1
    code, out4, _ = run(capsys, "verify", "--config", str(first), "--seed", "3")
    assert json.loads(out4)["config"]["seed"] == 3
    saved = tmp_path / "b.json"
    run(capsys, "verify", "--suite", "propagator", "--out", str(saved))
    assert json.loads(saved.read_text())["config"]["out"] == str(saved)


def test_config_without_command(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 8}))
    with pytest.raises(SystemExit):
        main(["--config", str(cfg)])
    capsys.readouterr()
    code, out, _ = run(capsys, "range", "--config", str(cfg))
    assert code == 0 and json.loads(out)["config"]["n"] == 8


def test_scan_table(capsys, tmp_path):
    out_path = tmp_path / "scan.csv"
    code, out, _ = run(capsys, "scan", "--p-values", "1.4", "3", "--eps", "4", "0", "--T-max", "8",
                       "--out", str(out_path))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,p,epsilon,lifespan,verdict"
    assert lines[2] == "4,1.4,0.0,8.0,global"      # eps = 0 never blows up
    assert out_path.read_text() == out
    side = json.loads(out_path.with_suffix(".json").read_text())
    assert side["transition"]["1.4"] == 4.0 and side["p_c"]["a"] == {"num": 2, "den": 1}
    assert side["p_c"]["b"]["num"] == 0
    assert out_path.with_suffix(".dat").exists()


def test_simulate_auto(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "--out", str(tmp_path / "sim"))
    doc = json.loads(out)
    rep = doc["report"]
    assert code == 0 and doc["passed"]
    assert rep["mode"] == "guaranteed" and rep["verdict"] == "converged"
    assert rep["weak_residual"] <= 1e-4
    assert (tmp_path / "sim" / "snapshot" / "manifest.json").exists()
    assert (tmp_path / "sim" / "norms.csv").exists()
    assert (tmp_path / "sim" / "report.json").read_text() == out


def test_simulate_fd_backend(capsys):
    code, out, _ = run(capsys, "simulate", "--backend", "radial-fd", "--T", "1", "--steps", "16")
    doc = json.loads(out)
    assert code == 0 and doc["report"]["blowup_time"] is None
    code, out, _ = run(capsys, "simulate", "--backend", "radial-fd", "--eps", "200", "--T", "4",
                       "--steps", "16")
    assert code == 1 and json.loads(out)["report"]["blowup_time"] is not None


def test_besov_norm_command(capsys):
    code, out, _ = run(capsys, "besov-norm", "--N", "64", "--L", "12", "--p-int", "2", "--s", "0.5")
    doc = json.loads(out)
    assert code == 0 and doc["norm"] > 0
    code, _, err = run(capsys, "besov-norm", "--dim", "4")
    assert code == 2
