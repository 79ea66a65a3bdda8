"""Link position references with analytic derivatives through order 4."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from vssea.core.config import DEFAULT_REFERENCE_AMPLITUDE, DEFAULT_STIFFNESS_POSITION
from vssea.core.reconstruction import ReferencePoint

REFERENCE_KINDS = ("step", "sinusoid", "quintic")


@dataclass(frozen=True)
class ReferenceTrajectory:
    kind: str = "step"
    amplitude: float = DEFAULT_REFERENCE_AMPLITUDE
    start: float = 0.0
    frequency: float = 1.0  # rad/s, sinusoid
    duration: float = 1.0  # s, quintic
    stiffness_position: float = DEFAULT_STIFFNESS_POSITION

    def to_dict(self) -> dict:
        return asdict(self)


def reference_eval(traj: ReferenceTrajectory, t: float) -> ReferencePoint:
    """(r, r', r'', r''', r'''') at time t.

    Every kind is zero before `start`. A step holds its amplitude from
    `start` on with all derivatives zero on both sides of the jump.
    """
    if t < traj.start:
        return ReferencePoint()
    a = traj.amplitude
    if traj.kind == "step":
        return ReferencePoint(r=a)
    if traj.kind == "sinusoid":
        return _sinusoid(a, traj.frequency, t - traj.start)
    if traj.kind == "quintic":
        return _quintic(a, traj.duration, t - traj.start)
    raise ValueError(f"unknown reference kind {traj.kind!r}")


def _sinusoid(a: float, w: float, s: float) -> ReferencePoint:
    sn, cs = math.sin(w * s), math.cos(w * s)
    return ReferencePoint(
        r=a * sn,
        r_dot=a * w * cs,
        r_ddot=-a * w**2 * sn,
        r_dddot=-a * w**3 * cs,
        r_4=a * w**4 * sn,
    )


def _quintic(a: float, T: float, s: float) -> ReferencePoint:
    """Rest-to-rest a (10 tau^3 - 15 tau^4 + 6 tau^5), tau = s / T."""
    if s >= T:
        return ReferencePoint(r=a)
    tau = s / T
    return ReferencePoint(
        r=a * (10 * tau**3 - 15 * tau**4 + 6 * tau**5),
        r_dot=a / T * (30 * tau**2 - 60 * tau**3 + 30 * tau**4),
        r_ddot=a / T**2 * (60 * tau - 180 * tau**2 + 120 * tau**3),
        r_dddot=a / T**3 * (60 - 360 * tau + 360 * tau**2),
        r_4=a / T**4 * (-360 + 720 * tau),
    )
