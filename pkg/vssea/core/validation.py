from __future__ import annotations

import math
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from vssea.core.control import SfbGains, SmcParams, StiffnessGains
    from vssea.core.observer import DobGains
    from vssea.core.plant import PlantParams
    from vssea.sim.disturbance import DisturbanceProfile
    from vssea.sim.reference import ReferenceTrajectory
    from vssea.sim.scenario import ScenarioConfig, SimSettings


class ValidationError(Exception):
    """A value violates its invariant. `key` is the dotted config path when known."""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        self.detail = message
        super().__init__(f"{key}: {message}" if key else message)


def _finite(value: float, key: str) -> None:
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(f"must be a finite number, got {value!r}", key)


def _positive(value: float, key: str) -> None:
    _finite(value, key)
    if value <= 0:
        raise ValidationError(f"must be > 0, got {value}", key)


def _nonnegative(value: float, key: str) -> None:
    _finite(value, key)
    if value < 0:
        raise ValidationError(f"must be >= 0, got {value}", key)


# -- Plant --


def validate_plant(params: PlantParams) -> None:
    """Inertias > 0, frictions >= 0, k > 0, N >= 1, spring constants > 0."""
    for name in ("j_l", "j_e", "j_ms"):
        _positive(getattr(params, name), f"plant.{name}")
    for name in ("b_l", "b_e", "b_ms"):
        _nonnegative(getattr(params, name), f"plant.{name}")
    _positive(params.k, "plant.k")
    _finite(params.gear_ratio, "plant.n")
    if params.gear_ratio < 1:
        raise ValidationError(f"gear ratio must be >= 1, got {params.gear_ratio}", "plant.n")
    _positive(params.theta_ms_min, "plant.theta_ms_min")
    _positive(params.upsilon_tau, "plant.upsilon_tau")
    _positive(params.upsilon_k, "plant.upsilon_k")
    if params.spring_consistent and not math.isclose(
        params.upsilon_k, params.upsilon_tau / 2.0, rel_tol=1e-12
    ):
        raise ValidationError(
            f"spring_consistent requires upsilon_k == upsilon_tau / 2 "
            f"({params.upsilon_tau / 2.0}), got {params.upsilon_k}",
            "plant.upsilon_k",
        )


# -- Controllers and observers --


def validate_sfb_gains(gains: SfbGains) -> None:
    from vssea.core.numkit import chain_polynomial, routh_hurwitz

    if len(gains.K) != 4 or not all(math.isfinite(k) for k in gains.K):
        raise ValidationError(f"K must be 4 finite values, got {list(gains.K)}", "controller.gains")
    if not routh_hurwitz(chain_polynomial(gains.K)):
        raise ValidationError(f"closed-loop polynomial for K={list(gains.K)} is not Hurwitz", "controller.gains")


def validate_smc(params: SmcParams) -> None:
    from numpy.polynomial import Polynomial

    from vssea.core.numkit import routh_hurwitz

    s1, s2, s3, last = params.S
    if last != 1.0:
        raise ValidationError("last sliding coefficient must be 1", "controller.smc_s")
    if s3 <= 0:
        raise ValidationError(f"s3 must be > 0, got {s3}", "controller.smc_s3")
    if not routh_hurwitz(Polynomial([s1, s2, s3, 1.0])):
        raise ValidationError(
            f"sliding manifold s^3 + {s3} s^2 + {s2} s + {s1} is not Hurwitz", "controller.smc_s1"
        )
    _positive(params.rho, "controller.smc_rho")
    _nonnegative(params.epsilon, "controller.smc_epsilon")


def validate_stiffness_gains(gains: StiffnessGains) -> None:
    _positive(gains.kp, "controller.stiffness_kp")
    _positive(gains.kd, "controller.stiffness_kd")
    _positive(gains.g_ms, "controller.stiffness_dob_bandwidth")


def validate_dob_gains(gains: DobGains) -> None:
    """Per-channel lambda^3 + g0 lambda^2 + g1 lambda + g2 must be Hurwitz."""
    for name in ("g0", "g1", "g2"):
        _positive(getattr(gains, name), f"observer.{name}")
    if not gains.g0 * gains.g1 > gains.g2:
        raise ValidationError(
            f"observer gains need g0*g1 > g2, got {gains.g0}*{gains.g1} <= {gains.g2}", "observer.g2"
        )


# -- Scenario pieces --


def validate_reference(ref: ReferenceTrajectory) -> None:
    if ref.kind not in ("step", "sinusoid", "quintic"):
        raise ValidationError(f"unknown reference kind {ref.kind!r}", "reference.kind")
    _finite(ref.amplitude, "reference.amplitude")
    _finite(ref.start, "reference.start_s")
    if ref.kind == "sinusoid":
        _positive(ref.frequency, "reference.frequency")
    if ref.kind == "quintic":
        _positive(ref.duration, "reference.duration_s")


def validate_disturbance(profile: DisturbanceProfile) -> None:
    for channel in ("link", "motor", "stiffness"):
        c = getattr(profile, channel)
        _finite(c.bias, f"disturbance.{channel}_bias")
        _finite(c.amplitude, f"disturbance.{channel}_amplitude")
        _nonnegative(c.frequency, f"disturbance.{channel}_frequency")
    _finite(profile.t_on, "disturbance.t_on")
    _finite(profile.t_off, "disturbance.t_off")
    if not profile.t_on < profile.t_off:
        raise ValidationError(
            f"window needs t_on < t_off, got [{profile.t_on}, {profile.t_off}]", "disturbance.t_off"
        )


def validate_sim(sim: SimSettings) -> None:
    _positive(sim.step_s, "sim.step_s")
    _finite(sim.duration_s, "sim.duration_s")
    if sim.duration_s < sim.step_s:
        raise ValidationError(
            f"duration {sim.duration_s} shorter than step {sim.step_s}", "sim.duration_s"
        )
    if not isinstance(sim.decimation, int) or sim.decimation < 1:
        raise ValidationError(f"must be a positive integer, got {sim.decimation!r}", "sim.decimation")


def validate_scenario(config: ScenarioConfig) -> None:
    """Every component invariant plus cross-checks between sections."""
    validate_plant(config.plant)
    validate_reference(config.reference)
    validate_disturbance(config.disturbance)
    validate_sim(config.sim)
    validate_controller_kind(config.controller.kind)
    if config.observer.mode not in ("estimate", "truth"):
        raise ValidationError(f"unknown observer mode {config.observer.mode!r}", "observer.mode")
    validate_dob_gains(config.observer.gains())
    validate_stiffness_gains(config.controller.stiffness_gains())
    if config.controller.kind == "smc":
        validate_smc(config.controller.smc_params())
    if config.reference.stiffness_position < config.plant.theta_ms_min:
        raise ValidationError(
            f"stiffness position {config.reference.stiffness_position} below "
            f"theta_ms_min {config.plant.theta_ms_min}",
            "reference.stiffness_position",
        )
    _nonnegative(config.observer.noise_std, "observer.noise_std")
    _nonnegative(config.controller.torque_limit, "controller.torque_limit")


def validate_controller_kind(kind: str) -> None:
    from vssea.core.synthesis import CONTROLLER_KINDS

    if kind not in CONTROLLER_KINDS:
        raise ValidationError(
            f"unknown controller kind {kind!r} (expected one of {', '.join(CONTROLLER_KINDS)})",
            "controller.kind",
        )
