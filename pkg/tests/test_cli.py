import os
import subprocess
import sys

import numpy as np
import pytest

from putboundary import cli
from putboundary.errors import SolverError
from putboundary.validation import CheckResult, ValidationReport

RATE = ["--model", "rate", "--delta", "0", "--sigma", "0.3", "--T", "10", "--K", "1"]
STANDARD = ["--model", "standard", "--r", "0.05", "--delta", "0", "--sigma", "0.2", "--K", "100",
            "--T", "1"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse(csv_text):
    lines = csv_text.strip().split("\n")
    return lines[0], np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])


class TestBoundary:
    def test_rate_boundary(self, capsys):
        code, out, _ = run(capsys, "boundary", *RATE)
        header, rows = parse(out)
        assert code == 0 and header == "t,b"
        assert rows.shape == (512, 2)
        assert rows[0, 1] == pytest.approx(0.6034208087, abs=1e-9)
        assert rows[-1, 1] == 1.0

    def test_strike_last_row_is_terminal_strike(self, capsys):
        code, out, _ = run(capsys, "boundary", "--model", "strike", "--r", "0.05", "--sigma", "0.2",
                           "--T", "10", "--KT", "1", "--m", "0")
        assert code == 0 and out.strip().split("\n")[-1] == "10,1"

    def test_dividend_monotone(self, capsys):
        _, out, _ = run(capsys, "boundary", "--model", "dividend", "--r", "0.05", "--sigma", "0.3",
                        "--T", "10", "--K", "1")
        _, rows = parse(out)
        assert np.all(np.diff(rows[:, 1]) >= 0)

    def test_twelve_significant_digits(self, capsys):
        _, out, _ = run(capsys, "boundary", *RATE, "--grid", "3")
        assert out == "t,b\n0,0.603420808669\n5,0.66770604209\n10,1\n"

    def test_standard_solver(self, capsys):
        code, out, _ = run(capsys, "boundary", *STANDARD, "--grid", "64")
        _, rows = parse(out)
        assert code == 0 and rows.shape == (64, 2) and rows[-1, 1] == 100.0


class TestPrice:
    def test_single_spot(self, capsys):
        code, out, _ = run(capsys, "price", *STANDARD, "--spot", "10")
        header, rows = parse(out)
        assert code == 0 and header == "x,european,premium,american"
        assert rows[0, 3] == pytest.approx(90.0, abs=1e-2)

    def test_ladder(self, capsys):
        code, out, _ = run(capsys, "price", *RATE)
        _, rows = parse(out)
        assert code == 0 and rows.shape == (100, 4)
        assert np.all(rows[:, 3] >= rows[:, 1])
        np.testing.assert_allclose(rows[:, 3], rows[:, 1] + rows[:, 2], rtol=1e-11)

    def test_at_the_money_standard(self, capsys):
        _, out, _ = run(capsys, "price", *STANDARD, "--spot", "100")
        _, rows = parse(out)
        assert rows[0, 3] == pytest.approx(6.09039, rel=1e-3)


class TestParams:
    def test_rate_drops_maturity_row(self, capsys):
        code, out, _ = run(capsys, "params", *RATE, "--grid", "5")
        header, rows = parse(out)
        assert code == 0 and header == "t,param"
        assert rows.shape == (4, 2) and rows[0, 1] == pytest.approx(0.0595619, abs=1e-7)

    def test_vol_keeps_maturity_row(self, capsys):
        _, out, _ = run(capsys, "params", "--model", "vol", "--r", "0.05", "--T", "10", "--K", "1",
                        "--grid", "5")
        _, rows = parse(out)
        assert rows.shape == (5, 2) and rows[-1, 1] == 0.0

    def test_strike_with_drift(self, capsys):
        code, out, _ = run(capsys, "params", "--model", "strike", "--r", "0.05", "--sigma", "0.2",
                           "--T", "10", "--KT", "1", "--m", "0.02", "--grid", "5")
        _, rows = parse(out)
        assert code == 0 and rows[-1, 1] == 1.0

    def test_standard_has_none(self, capsys):
        assert run(capsys, "params", *STANDARD)[0] == 2


class TestValidate:
    def test_limits(self, capsys):
        code, out, _ = run(capsys, "validate", "--suite", "limits")
        assert code == 0 and out.endswith("5/5 checks passed\n")

    def test_residuals_rate(self, capsys):
        code, out, _ = run(capsys, "validate", "--suite", "residuals", "--model", "rate")
        assert code == 0 and "FAIL" not in out

    def test_mc_small(self, capsys):
        code, out, _ = run(capsys, "validate", "--suite", "mc", "--model", "dividend", "--seed", "42",
                           "--paths", "20000")
        assert code == 0, out

    def test_failure_exit_code(self, capsys, monkeypatch):
        failing = ValidationReport((CheckResult("x", 2.0, 1.0),))
        monkeypatch.setattr(cli, "run_suite", lambda *a, **k: failing)
        assert run(capsys, "validate", "--suite", "limits")[0] == 5

    def test_unknown_suite(self, capsys):
        code, _, err = run(capsys, "validate", "--suite", "bogus")
        assert code == 2 and "unknown suite" in err


class TestErrors:
    @pytest.mark.parametrize("argv", [
        [],
        ["boundary"],
        ["boundary", "--model", "rate", "--sigma", "0.3", "--T", "10"],
        ["boundary", *RATE, "--r", "0.05"],
        ["boundary", "--model", "rate", "--sigma", "-0.3", "--T", "10", "--K", "1"],
        ["boundary", "--model", "bogus"],
        ["boundary", *RATE, "--grid", "1"],
        ["price", *RATE, "--t", "10"],
    ])
    def test_usage_errors(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2

    def test_model_validity(self, capsys):
        code, _, err = run(capsys, "boundary", "--model", "strike", "--r", "0.05", "--sigma", "0.2",
                           "--T", "10", "--KT", "1", "--m", "500")
        assert code == 3 and "model error" in err

    def test_solver_failure(self, capsys, monkeypatch):
        def boom(*a, **k):
            raise SolverError("no convergence", node=3)
        monkeypatch.setattr(cli, "solve_standard_boundary", boom)
        assert run(capsys, "boundary", *STANDARD)[0] == 4


class TestConfigAndOutput:
    def test_config_file_and_precedence(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# rate model\nmodel = rate\nsigma = 0.3  # vol\nT = 10\nK = 2\n")
        _, from_file, _ = run(capsys, "boundary", "--config", str(cfg), "--grid", "3")
        _, overridden, _ = run(capsys, "boundary", "--config", str(cfg), "--grid", "3", "--K", "1")
        assert from_file.split("\n")[-2] == "10,2"
        assert overridden == "t,b\n0,0.603420808669\n5,0.66770604209\n10,1\n"

    @pytest.mark.parametrize("body", ["model rate\n", "colour = red\n", "T = ten\n"])
    def test_bad_config(self, capsys, tmp_path, body):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(body)
        assert run(capsys, "boundary", "--config", str(cfg))[0] == 2

    def test_missing_config(self, capsys, tmp_path):
        assert run(capsys, "boundary", "--config", str(tmp_path / "none.cfg"))[0] == 2

    def test_out_file_is_written_atomically(self, capsys, tmp_path):
        target = tmp_path / "b.csv"
        code, out, _ = run(capsys, "boundary", *RATE, "--grid", "3", "--out", str(target))
        assert code == 0 and out == ""
        assert target.read_bytes() == b"t,b\n0,0.603420808669\n5,0.66770604209\n10,1\n"
        assert os.listdir(tmp_path) == ["b.csv"]

    def test_unwritable_output(self, capsys, tmp_path):
        assert run(capsys, "boundary", *RATE, "--out", str(tmp_path / "no" / "b.csv"))[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "putboundary.cli", "boundary", *RATE, "--grid", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "t,b\n0,0.603420808669\n10,1\n"
