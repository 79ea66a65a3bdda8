import math

import numpy as np
import pytest

from vssea.core.config import TRACE_COLUMNS
from vssea.sim.metrics import compute_metrics, rms, settling_time, tail_mask
from vssea.sim.scenario import SimTrace


def make_trace(t, e1, est_err=None, amplitude=1.0):
    rows = []
    for i, (ti, ei) in enumerate(zip(t, e1)):
        row = dict.fromkeys(TRACE_COLUMNS, 0.0)
        row["t"], row["e1"] = float(ti), float(ei)
        if est_err is not None:
            row["dist_l_est"] = float(est_err[i])
        rows.append(tuple(row[name] for name in TRACE_COLUMNS))
    return SimTrace(rows, amplitude=amplitude)


class TestSettlingTime:
    def test_always_inside(self):
        t = np.linspace(1.0, 2.0, 11)
        assert settling_time(t, np.zeros(11), 1.0) == 1.0

    def test_never_settles(self):
        t = np.linspace(0.0, 1.0, 11)
        assert settling_time(t, np.full(11, 0.1), 1.0) is None

    def test_exponential_decay(self):
        h = 1e-3
        t = np.arange(0.0, 10.0 + h / 2, h)
        ts = settling_time(t, np.exp(-t), 1.0)
        assert ts == pytest.approx(-math.log(0.02), abs=h)

    def test_band_scales_with_amplitude(self):
        t = np.linspace(0.0, 1.0, 11)
        e = np.full(11, 0.1)
        assert settling_time(t, e, 10.0) == 0.0


class TestHelpers:
    def test_rms(self):
        assert rms(np.array([3.0, -4.0])) == pytest.approx(math.sqrt(12.5))
        assert rms(np.array([])) == 0.0

    def test_tail_mask(self):
        t = np.linspace(0.0, 10.0, 101)
        assert t[tail_mask(t)][0] == pytest.approx(9.0)


class TestComputeMetrics:
    def test_zero_trace(self):
        t = np.linspace(0.0, 1.0, 11)
        m = compute_metrics(make_trace(t, np.zeros(11)))
        assert m.rms_error == 0.0
        assert m.max_abs_error == 0.0
        assert m.settling_time_2pct == 0.0
        assert m.steady_state_error == 0.0
        assert m.settled

    def test_constant_offset(self):
        t = np.linspace(0.0, 1.0, 11)
        m = compute_metrics(make_trace(t, np.full(11, 0.1)))
        assert m.settling_time_2pct is None
        assert not m.settled
        assert m.steady_state_error == pytest.approx(0.1)
        assert m.rms_error == pytest.approx(0.1)

    def test_estimation_error(self):
        t = np.linspace(0.0, 1.0, 4)
        m = compute_metrics(make_trace(t, np.zeros(4), est_err=[1.0, -1.0, 1.0, -1.0]))
        assert m.est_error_rms == pytest.approx(1.0)

    def test_empty_trace(self):
        with pytest.raises(ValueError):
            compute_metrics(SimTrace())
