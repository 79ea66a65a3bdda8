"""Windowed bias-plus-sinusoid torque disturbances on the three motors/links."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from vssea.core.config import (
    DEFAULT_DIST_LINK_AMPLITUDE,
    DEFAULT_DIST_LINK_BIAS,
    DEFAULT_DIST_LINK_FREQUENCY,
    DEFAULT_DIST_MOTOR_AMPLITUDE,
    DEFAULT_DIST_MOTOR_BIAS,
    DEFAULT_DIST_MOTOR_FREQUENCY,
    DEFAULT_DIST_T_OFF,
    DEFAULT_DIST_T_ON,
)
from vssea.core.observer import DisturbanceEstimate
from vssea.core.plant import DisturbanceSample, PlantParams

CHANNELS = ("link", "motor", "stiffness")


@dataclass(frozen=True)
class ChannelProfile:
    """bias + amplitude sin(frequency t), N m and rad/s."""

    bias: float = 0.0
    amplitude: float = 0.0
    frequency: float = 0.0

    def derivatives(self, t: float) -> tuple[float, float, float]:
        w = self.frequency
        sn, cs = math.sin(w * t), math.cos(w * t)
        return (
            self.bias + self.amplitude * sn,
            self.amplitude * w * cs,
            -self.amplitude * w * w * sn,
        )


@dataclass(frozen=True)
class DisturbanceProfile:
    link: ChannelProfile = field(
        default_factory=lambda: ChannelProfile(
            DEFAULT_DIST_LINK_BIAS, DEFAULT_DIST_LINK_AMPLITUDE, DEFAULT_DIST_LINK_FREQUENCY
        )
    )
    motor: ChannelProfile = field(
        default_factory=lambda: ChannelProfile(
            DEFAULT_DIST_MOTOR_BIAS, DEFAULT_DIST_MOTOR_AMPLITUDE, DEFAULT_DIST_MOTOR_FREQUENCY
        )
    )
    stiffness: ChannelProfile = field(default_factory=ChannelProfile)
    t_on: float = DEFAULT_DIST_T_ON
    t_off: float = DEFAULT_DIST_T_OFF

    @classmethod
    def none(cls) -> DisturbanceProfile:
        return cls(ChannelProfile(), ChannelProfile(), ChannelProfile())

    def active(self, t: float) -> bool:
        return self.t_on <= t < self.t_off

    def to_dict(self) -> dict:
        return asdict(self)


def disturbance_eval(profile: DisturbanceProfile, t: float) -> DisturbanceSample:
    """Torques at t: bias plus sinusoid inside [t_on, t_off), exact zero outside."""
    if not profile.active(t):
        return DisturbanceSample()
    return DisturbanceSample(
        tau_l=profile.link.derivatives(t)[0],
        tau_e=profile.motor.derivatives(t)[0],
        tau_ms=profile.stiffness.derivatives(t)[0],
    )


def disturbance_truth(params: PlantParams, profile: DisturbanceProfile, t: float) -> DisturbanceEstimate:
    """Exact D, D', D'' of the four-state model, one-sided inside the window."""
    if not profile.active(t):
        return DisturbanceEstimate.zero()
    return DisturbanceEstimate.from_torques(
        params, profile.link.derivatives(t), profile.motor.derivatives(t)
    )
