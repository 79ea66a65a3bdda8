import numpy as np

from vssea.__main__ import ExitStatus, run
from vssea.core.config import TRACE_COLUMNS
from vssea.io.csvfile import TRUNCATION_MARKER

SHORT = ["--set", "sim.duration_s=0.2"]


def gains_from(out: str) -> list[float]:
    line = next(l for l in out.splitlines() if l.startswith("K:"))
    return [float(v) for v in line.split(":", 1)[1].split(",")]


class TestSynthesize:
    def test_default(self, capsys):
        assert run(["synthesize"]) == ExitStatus.OK
        out = capsys.readouterr().out
        assert "controllability rank:    4" in out
        assert "P positive definite:     yes" in out
        np.testing.assert_allclose(gains_from(out), [256.0, 256.0, 96.0, 16.0])

    def test_custom_poles(self, capsys):
        status = run(["synthesize", "--set", "controller.kind=pp", "--set", "controller.poles=-2,-2,-2,-2"])
        assert status == ExitStatus.OK
        np.testing.assert_allclose(gains_from(capsys.readouterr().out), [16.0, 32.0, 24.0, 8.0])

    def test_lqr_reports_care(self, capsys):
        assert run(["synthesize", "--set", "controller.kind=lqr"]) == ExitStatus.OK
        out = capsys.readouterr().out
        assert "gain method:             lqr" in out
        assert "care iterations:" in out

    def test_unstable_pole(self, capsys):
        status = run(["synthesize", "--set", "controller.poles=1,-1,-1,-1"])
        assert status == ExitStatus.SYNTHESIS_FAILURE
        assert "synthesis failed" in capsys.readouterr().err


class TestConfigErrors:
    def test_invalid_value(self, capsys):
        assert run(["synthesize", "--set", "sim.step_s=-1"]) == ExitStatus.CONFIG_ERROR
        assert "sim.step_s" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run(["simulate", "--config", str(tmp_path / "none.ini")]) == ExitStatus.CONFIG_ERROR

    def test_bad_file_line(self, tmp_path, capsys):
        path = tmp_path / "bad.ini"
        path.write_text("[plant]\nk = 100\nbogus = 1\n")
        assert run(["synthesize", "--config", str(path)]) == ExitStatus.CONFIG_ERROR
        assert "line 3" in capsys.readouterr().err


class TestSimulate:
    def test_stdout_csv_and_summary(self, capsys):
        assert run(["simulate", *SHORT]) == ExitStatus.OK
        captured = capsys.readouterr()
        lines = captured.out.splitlines()
        assert lines[0] == ",".join(TRACE_COLUMNS)
        assert len(lines) == 1 + 200 // 10 + 1
        assert "rms_error:" in captured.err

    def test_out_file(self, tmp_path, capsys):
        path = tmp_path / "trace.csv"
        assert run(["simulate", *SHORT, "--out", str(path)]) == ExitStatus.OK
        assert path.read_text().startswith("t,ref,")
        assert "settling_time_2pct:" in capsys.readouterr().out

    def test_seed_flag(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        noisy = [*SHORT, "--set", "observer.noise_std=1e-4"]
        run(["simulate", *noisy, "--seed", "4", "--out", str(a)])
        run(["simulate", *noisy, "--seed", "4", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_divergence(self, tmp_path, capsys):
        path = tmp_path / "trace.csv"
        status = run([
            "simulate", "--set", "observer.bandwidth=1000", "--set", "sim.step_s=0.05",
            "--out", str(path),
        ])
        assert status == ExitStatus.SIMULATION_DIVERGENCE
        assert TRUNCATION_MARKER in path.read_text()
        assert "diverged" in capsys.readouterr().err


class TestSweep:
    def test_rows(self, capsys):
        assert run(["sweep", *SHORT, "--vary", "observer.bandwidth=20,-1"]) == ExitStatus.OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("observer.bandwidth,rms_error")
        assert lines[1].startswith("20,")
        assert lines[2].startswith("-1,")
        assert "ConfigError" in lines[2]

    def test_unknown_key(self):
        assert run(["sweep", "--vary", "observer.width=1"]) == ExitStatus.CONFIG_ERROR


class TestValidate:
    def test_single_check(self, capsys):
        assert run(["validate", "--check", "controllability"]) == ExitStatus.OK
        out = capsys.readouterr().out
        assert "controllability  PASS" in out
        assert "1/1 checks passed" in out

    def test_injected_fault_is_detected(self, capsys):
        status = run(["validate", "--check", "representation-equivalence", "--inject", "pi2-inertia"])
        assert status == ExitStatus.CHECKS_FAILED
        assert "FAIL" in capsys.readouterr().out
