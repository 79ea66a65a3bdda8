"""VSSEA physics: nonlinear spring, equilibrium and stiffness-modulation
dynamics, and the linearized four-state model.

Gear-side convention throughout: J_e = N^2 J_me + J_g, b_e = N^2 b_me + b_g
and the spring torque seen by the equilibrium motor is tau_s itself. The
spring's second argument is the deflection theta_e - theta_l.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from vssea.core.config import (
    DEFAULT_B_E,
    DEFAULT_B_L,
    DEFAULT_B_MS,
    DEFAULT_GEAR_RATIO,
    DEFAULT_J_E,
    DEFAULT_J_L,
    DEFAULT_J_MS,
    DEFAULT_K,
    DEFAULT_THETA_MS_MIN,
    DEFAULT_UPSILON_K,
    DEFAULT_UPSILON_TAU,
)


class SpringDomainError(ValueError):
    pass


@dataclass(frozen=True)
class PlantParams:
    """Physical constants (gear side)."""

    j_l: float = DEFAULT_J_L
    b_l: float = DEFAULT_B_L
    j_e: float = DEFAULT_J_E
    b_e: float = DEFAULT_B_E
    k: float = DEFAULT_K
    gear_ratio: float = DEFAULT_GEAR_RATIO
    j_ms: float = DEFAULT_J_MS
    b_ms: float = DEFAULT_B_MS
    upsilon_tau: float = DEFAULT_UPSILON_TAU
    upsilon_k: float = DEFAULT_UPSILON_K
    theta_ms_min: float = DEFAULT_THETA_MS_MIN
    spring_consistent: bool = True
    spring: str = "linear"  # or "nonlinear"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> PlantParams:
        return cls(**d)


def to_gear_side(j_motor: float, b_motor: float, gear_ratio: float) -> tuple[float, float]:
    """Reflect motor-side inertia and friction through the gearbox."""
    n2 = gear_ratio * gear_ratio
    return n2 * j_motor, n2 * b_motor


@dataclass(frozen=True)
class PlantState:
    """[theta_l, dtheta_l, theta_e, dtheta_e]; also used for its time derivative."""

    theta_l: float = 0.0
    dtheta_l: float = 0.0
    theta_e: float = 0.0
    dtheta_e: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.theta_l, self.dtheta_l, self.theta_e, self.dtheta_e])

    @classmethod
    def from_array(cls, x) -> PlantState:
        return cls(float(x[0]), float(x[1]), float(x[2]), float(x[3]))

    @property
    def deflection(self) -> float:
        return self.theta_e - self.theta_l


@dataclass(frozen=True)
class StiffnessState:
    theta_ms: float
    dtheta_ms: float = 0.0


@dataclass(frozen=True)
class DisturbanceSample:
    """Torque disturbances on the link, equilibrium motor and stiffness motor."""

    tau_l: float = 0.0
    tau_e: float = 0.0
    tau_ms: float = 0.0


ZERO_DISTURBANCE = DisturbanceSample()


# -- Spring --


def _guard(params: PlantParams, theta_ms: float) -> None:
    if not theta_ms >= params.theta_ms_min:
        raise SpringDomainError(
            f"stiffness-motor position {theta_ms} below theta_ms_min {params.theta_ms_min}"
        )


def spring_torque(params: PlantParams, theta_ms: float, delta: float) -> float:
    """tau_s = (Upsilon_tau / theta_ms^3) sin(delta / 2)."""
    _guard(params, theta_ms)
    return params.upsilon_tau / theta_ms**3 * math.sin(0.5 * delta)


def spring_stiffness(params: PlantParams, theta_ms: float, delta: float) -> float:
    """Upsilon = (Upsilon_k / theta_ms^3) cos(delta / 2)."""
    _guard(params, theta_ms)
    return params.upsilon_k / theta_ms**3 * math.cos(0.5 * delta)


def transmitted_torque(params: PlantParams, theta_ms: float, delta: float) -> float:
    """Spring torque under the configured spring model."""
    if params.spring == "nonlinear":
        return spring_torque(params, theta_ms, delta)
    return params.k * delta


# -- Dynamics --


def equilibrium_deriv(
    params: PlantParams,
    state: PlantState,
    tau_e: float,
    tau_s: float,
    d: DisturbanceSample = ZERO_DISTURBANCE,
) -> PlantState:
    """Link and equilibrium-motor lines of the dynamics."""
    ddtheta_l = (tau_s - params.b_l * state.dtheta_l - d.tau_l) / params.j_l
    ddtheta_e = (tau_e - tau_s - params.b_e * state.dtheta_e - d.tau_e) / params.j_e
    return PlantState(state.dtheta_l, ddtheta_l, state.dtheta_e, ddtheta_e)


def stiffness_mech_deriv(
    params: PlantParams,
    s: StiffnessState,
    tau_ms: float,
    tau_s: float,
    tau_ms_d: float = 0.0,
) -> StiffnessState:
    ddtheta_ms = (tau_ms - tau_s - params.b_ms * s.dtheta_ms - tau_ms_d) / params.j_ms
    return StiffnessState(s.dtheta_ms, ddtheta_ms)


def nonlinear_deriv(
    params: PlantParams,
    state: PlantState,
    stiff: StiffnessState,
    inputs: tuple[float, float],
    d: DisturbanceSample = ZERO_DISTURBANCE,
) -> tuple[PlantState, StiffnessState]:
    """One spring torque loads link, motor and stiffness mechanism."""
    tau_e, tau_ms = inputs
    tau_s = spring_torque(params, stiff.theta_ms, state.deflection)
    return (
        equilibrium_deriv(params, state, tau_e, tau_s, d),
        stiffness_mech_deriv(params, stiff, tau_ms, tau_s, d.tau_ms),
    )


def plant_deriv(
    params: PlantParams, x: np.ndarray, tau_e: float, tau_ms: float, d: DisturbanceSample
) -> np.ndarray:
    """Six-state derivative [theta_l, dtheta_l, theta_e, dtheta_e, theta_ms, dtheta_ms]."""
    theta_l, dtheta_l, theta_e, dtheta_e, theta_ms, dtheta_ms = x
    tau_s = transmitted_torque(params, theta_ms, theta_e - theta_l)
    return np.array([
        dtheta_l,
        (tau_s - params.b_l * dtheta_l - d.tau_l) / params.j_l,
        dtheta_e,
        (tau_e - tau_s - params.b_e * dtheta_e - d.tau_e) / params.j_e,
        dtheta_ms,
        (tau_ms - tau_s - params.b_ms * dtheta_ms - d.tau_ms) / params.j_ms,
    ])


# -- Linear model --


def linear_matrices(params: PlantParams) -> tuple[np.ndarray, np.ndarray]:
    """A (4x4) and B (4x1) of the spring-linearized model."""
    k, jl, je = params.k, params.j_l, params.j_e
    A = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [-k / jl, -params.b_l / jl, k / jl, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [k / je, 0.0, -k / je, -params.b_e / je],
    ])
    B = np.array([[0.0], [0.0], [0.0], [1.0 / je]])
    return A, B


def disturbance_vector(params: PlantParams, d: DisturbanceSample) -> np.ndarray:
    """D = [0, tau_l/J_l, 0, tau_e/J_e]; enters as x' = A x + B u - D."""
    return np.array([0.0, d.tau_l / params.j_l, 0.0, d.tau_e / params.j_e])


def linear_deriv(params: PlantParams, x: np.ndarray, u: float, d: DisturbanceSample) -> np.ndarray:
    A, B = linear_matrices(params)
    return A @ x + B[:, 0] * u - disturbance_vector(params, d)


def mechanical_energy(params: PlantParams, state: PlantState) -> float:
    """Kinetic energy of link and motor plus linear spring potential."""
    return (
        0.5 * params.j_l * state.dtheta_l**2
        + 0.5 * params.j_e * state.dtheta_e**2
        + 0.5 * params.k * state.deflection**2
    )
