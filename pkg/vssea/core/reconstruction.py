"""Integrator-chain reparameterization of the actuator model.

Rewriting x' = A x + B u - D as x' = Gamma x + B u - Pi with Gamma the
pure shift turns the link-tracking error into a chain whose only
disturbance, Pi2'' + Pi4, enters through the input channel.

Every Pi-term takes its disturbances from a DisturbanceEstimate, so the
same code serves exact disturbances (oracle runs), observer estimates and
the nominal model (all-zero estimate).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vssea.core.observer import DisturbanceEstimate
from vssea.core.plant import DisturbanceSample, PlantParams, PlantState


@dataclass(frozen=True)
class ReferencePoint:
    """Reference and its first four time derivatives at one instant."""

    r: float = 0.0
    r_dot: float = 0.0
    r_ddot: float = 0.0
    r_dddot: float = 0.0
    r_4: float = 0.0


@dataclass(frozen=True)
class PiTerms:
    pi2: float
    pi2_dot: float
    pi2_ddot: float
    pi4: float

    @property
    def matched(self) -> float:
        return matched_disturbance(self.pi2_ddot, self.pi4)


@dataclass(frozen=True)
class ErrorState:
    e1: float = 0.0
    e2: float = 0.0
    e3: float = 0.0
    e4: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.e1, self.e2, self.e3, self.e4])

    @classmethod
    def from_array(cls, e) -> ErrorState:
        return cls(float(e[0]), float(e[1]), float(e[2]), float(e[3]))


def gamma_model(j_e: float) -> tuple[np.ndarray, np.ndarray]:
    """Shift matrix Gamma and input vector B = [0, 0, 0, 1/J_e]."""
    if not j_e > 0:
        raise ValueError(f"J_e must be positive, got {j_e}")
    gamma = np.eye(4, k=1)
    B = np.array([[0.0], [0.0], [0.0], [1.0 / j_e]])
    return gamma, B


def pi2(params: PlantParams, state: PlantState, tau_l_d: float, inertia: float | None = None) -> float:
    """Pi2 = theta_e - theta_l''.

    `inertia` overrides the J_l denominator; only fault-injection checks use it.
    """
    j = params.j_l if inertia is None else inertia
    return (
        params.j_l * state.theta_e
        + params.k * (state.theta_l - state.theta_e)
        + params.b_l * state.dtheta_l
        + tau_l_d
    ) / j


def pi4(params: PlantParams, state: PlantState, tau_e_d: float) -> float:
    """Pi4 = tau_e / J_e - theta_e'' for any applied tau_e."""
    return (params.k * state.deflection + params.b_e * state.dtheta_e + tau_e_d) / params.j_e


def model_derivatives(
    params: PlantParams, state: PlantState, tau_e: float, est: DisturbanceEstimate
) -> tuple[float, float, float, float]:
    """Model-based (theta_l'', theta_l''', theta_l'''', theta_e'')."""
    tl, tl_dot, tl_ddot = est.link_torque(params)
    te = est.motor_torque(params)[0]
    k, jl, bl = params.k, params.j_l, params.b_l
    delta = state.deflection
    acc_l = (k * delta - bl * state.dtheta_l - tl) / jl
    jerk_l = (k * (state.dtheta_e - state.dtheta_l) - bl * acc_l - tl_dot) / jl
    acc_e = (tau_e - k * delta - params.b_e * state.dtheta_e - te) / params.j_e
    snap_l = (k * (acc_e - acc_l) - bl * jerk_l - tl_ddot) / jl
    return acc_l, jerk_l, snap_l, acc_e


def pi2_derivatives(
    params: PlantParams, state: PlantState, tau_e: float, est: DisturbanceEstimate
) -> tuple[float, float]:
    """(Pi2', Pi2'') by the chain rule through the model, never by differencing."""
    _, jerk_l, snap_l, acc_e = model_derivatives(params, state, tau_e, est)
    return state.dtheta_e - jerk_l, acc_e - snap_l


def pi_terms(
    params: PlantParams,
    state: PlantState,
    tau_e: float,
    est: DisturbanceEstimate,
    inertia: float | None = None,
) -> PiTerms:
    """All Pi-terms from one disturbance source."""
    tl = est.link_torque(params)[0]
    te = est.motor_torque(params)[0]
    p2_dot, p2_ddot = pi2_derivatives(params, state, tau_e, est)
    return PiTerms(
        pi2=pi2(params, state, tl, inertia),
        pi2_dot=p2_dot,
        pi2_ddot=p2_ddot,
        pi4=pi4(params, state, te),
    )


def error_state(ref: ReferencePoint, state: PlantState, pi2_hat: float, pi2_dot_hat: float) -> ErrorState:
    """Measurable form of the chain error vector."""
    return ErrorState(
        ref.r - state.theta_l,
        ref.r_dot - state.dtheta_l,
        ref.r_ddot - state.theta_e + pi2_hat,
        ref.r_dddot - state.dtheta_e + pi2_dot_hat,
    )


def matched_disturbance(pi2_ddot: float, pi4_value: float) -> float:
    """Pi4-tilde = Pi2'' + Pi4."""
    return pi2_ddot + pi4_value


def gamma_form_deriv(
    params: PlantParams,
    x: np.ndarray,
    u: float,
    d: DisturbanceSample,
    inertia: float | None = None,
) -> np.ndarray:
    """x' = Gamma x + B u - Pi with Pi recomputed from x."""
    state = PlantState.from_array(x)
    gamma, B = gamma_model(params.j_e)
    pi = np.array([0.0, pi2(params, state, d.tau_l, inertia), 0.0, pi4(params, state, d.tau_e)])
    return gamma @ x + B[:, 0] * u - pi
