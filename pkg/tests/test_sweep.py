import pytest

from vssea.io.configfile import ConfigError
from vssea.sim.sweep import SweepSpec, run_row, run_sweep

BASE = "[sim]\nduration_s = 0.3\n"


class TestSweepSpec:
    def test_comma_values(self):
        spec = SweepSpec.parse("observer.bandwidth=20, 50,100")
        assert spec.key == "observer.bandwidth"
        assert spec.values == ("20", "50", "100")

    def test_semicolon_values_keep_commas(self):
        spec = SweepSpec.parse("controller.poles=-8,-8,-8,-8;-4,-4,-4,-4")
        assert spec.values == ("-8,-8,-8,-8", "-4,-4,-4,-4")

    def test_empty_list(self):
        with pytest.raises(ConfigError):
            SweepSpec.parse("observer.bandwidth=")

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            SweepSpec.parse("observer.width=1,2")

    def test_missing_equals(self):
        with pytest.raises(ConfigError):
            SweepSpec.parse("observer.bandwidth")


class TestRunSweep:
    def test_rows_follow_spec_order(self):
        spec = SweepSpec.parse("observer.bandwidth=100,20,50")
        rows = run_sweep(BASE, [], spec)
        assert [r.value for r in rows] == ["100", "20", "50"]
        assert all(r.metrics is not None and not r.error for r in rows)

    def test_invalid_value_lands_in_error_column(self):
        rows = run_sweep(BASE, [], SweepSpec.parse("observer.bandwidth=20,-1"))
        assert rows[0].metrics is not None
        assert rows[1].metrics is None
        assert "observer.bandwidth" in rows[1].error

    def test_synthesis_failure_lands_in_error_column(self):
        row = run_row(BASE, [], "controller.poles", "1,-1,-1,-1")
        assert row.metrics is None
        assert row.error.startswith("SynthesisError")

    def test_divergence_lands_in_error_column(self):
        overrides = ["observer.bandwidth=1000", "sim.step_s=0.05"]
        rows = run_sweep(BASE, overrides, SweepSpec.parse("sim.duration_s=0.1,12"))
        assert rows[0].metrics is not None
        assert rows[1].error.startswith("SimulationDivergence")

    def test_parallel_matches_serial(self):
        spec = SweepSpec.parse("controller.kind=pp+dob,lqr+dob,smc")
        serial = run_sweep(BASE, [], spec)
        parallel = run_sweep(BASE, [], spec, jobs=2)
        assert serial == parallel

    def test_faster_observer_estimates_better(self):
        overrides = ["disturbance.t_on=0", "sim.duration_s=1"]
        rows = run_sweep("", overrides, SweepSpec.parse("observer.bandwidth=5,50,500"))
        errors = [r.metrics.est_error_rms for r in rows]
        assert errors[0] > errors[1] > errors[2]
