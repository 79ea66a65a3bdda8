from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from vssea.core.config import SETTLING_BAND, STEADY_STATE_FRACTION
from vssea.sim.scenario import SimTrace

METRIC_FIELDS = (
    "rms_error",
    "max_abs_error",
    "settling_time_2pct",
    "steady_state_error",
    "est_error_rms",
)


@dataclass(frozen=True)
class Metrics:
    """Link tracking quality of one run. settling_time_2pct is None when unsettled."""

    rms_error: float
    max_abs_error: float
    settling_time_2pct: float | None
    steady_state_error: float
    est_error_rms: float

    @property
    def settled(self) -> bool:
        return self.settling_time_2pct is not None

    def to_dict(self) -> dict:
        return asdict(self)


def settling_time(t: np.ndarray, e1: np.ndarray, amplitude: float, band: float = SETTLING_BAND) -> float | None:
    """First sample time after which |e1| stays within band * amplitude."""
    outside = np.flatnonzero(np.abs(e1) > band * amplitude)
    if outside.size == 0:
        return float(t[0])
    last = int(outside[-1])
    if last == len(t) - 1:
        return None
    return float(t[last + 1])


def tail_mask(t: np.ndarray, fraction: float = STEADY_STATE_FRACTION) -> np.ndarray:
    span = t[-1] - t[0]
    return t >= t[-1] - fraction * span


def rms(x: np.ndarray) -> float:
    return math.sqrt(float(np.mean(np.square(x)))) if x.size else 0.0


def compute_metrics(trace: SimTrace) -> Metrics:
    if len(trace) == 0:
        raise ValueError("cannot compute metrics of an empty trace")
    cols = trace.columns
    t, e1 = cols["t"], cols["e1"]
    est_err = cols["dist_l_est"] - cols["dist_l_true"]
    return Metrics(
        rms_error=rms(e1),
        max_abs_error=float(np.max(np.abs(e1))),
        settling_time_2pct=settling_time(t, e1, trace.amplitude),
        steady_state_error=float(np.mean(np.abs(e1[tail_mask(t)]))),
        est_error_rms=rms(est_err),
    )
