"""Position and stiffness control laws.

The position laws are written against the chain error dynamics

    e' = Gamma e - B u + [0, 0, 0, Pi4~]

and return the equilibrium-motor torque tau_e. Pi2'' depends on the applied
tau_e, which makes Pi4~ affine in the input; `solve_input_loop` closes that
algebraic loop for any law built on it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from vssea.core.numkit import rk4_step
from vssea.core.plant import PlantParams, StiffnessState
from vssea.core.reconstruction import ErrorState


@dataclass(frozen=True)
class SfbGains:
    """K = [k1, k2, k3, k4]: closed loop s^4 + k4 s^3 + k3 s^2 + k2 s + k1."""

    K: tuple[float, float, float, float]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.K, dtype=float)

    def to_dict(self) -> dict:
        return {"K": list(self.K)}


@dataclass(frozen=True)
class SmcParams:
    S: tuple[float, float, float, float]  # [s1, s2, s3, 1]
    rho: float
    epsilon: float

    def to_dict(self) -> dict:
        return {"S": list(self.S), "rho": self.rho, "epsilon": self.epsilon}


@dataclass(frozen=True)
class StiffnessGains:
    kp: float
    kd: float
    g_ms: float

    def to_dict(self) -> dict:
        return {"kp": self.kp, "kd": self.kd, "g_ms": self.g_ms}


# -- Robust state feedback --


def sfb_control(
    gains: SfbGains,
    e_hat: ErrorState,
    pi4_tilde_hat: float,
    r_4: float,
    j_e: float,
    compensation_sign: float = 1.0,
) -> float:
    """tau_e = J_e (K^T e-hat + r'''' + c Pi4~-hat).

    c = +1 is the sign that cancels Pi4~ in the error dynamics;
    `compensation_sign` exists for fault injection. The uncompensated
    baselines pass the nominal Pi4~ (zero disturbance source) instead of
    dropping the term, since the nominal part carries the spring coupling.
    """
    feedback = float(np.dot(gains.as_array(), e_hat.as_array()))
    return j_e * (feedback + r_4 + compensation_sign * pi4_tilde_hat)


# -- Sliding mode --


def sliding_variable(params: SmcParams, e: ErrorState) -> float:
    """sigma = S^T e."""
    return float(np.dot(params.S, e.as_array()))


def smooth_sign(sigma: float, epsilon: float) -> float:
    """sgn(sigma) for epsilon = 0, linear saturation sigma/epsilon inside the band otherwise."""
    if epsilon <= 0.0:
        return float(np.sign(sigma))
    return float(np.clip(sigma / epsilon, -1.0, 1.0))


def equivalent_term(params: SmcParams, e_hat: ErrorState, pi2_ddot_hat: float, pi4_hat: float, r_4: float) -> float:
    """delta-hat = r'''' + Pi2''-hat + Pi4-hat + sum s_i e_(i+1)."""
    s1, s2, s3, _ = params.S
    return r_4 + pi2_ddot_hat + pi4_hat + s1 * e_hat.e2 + s2 * e_hat.e3 + s3 * e_hat.e4


def smc_control(
    params: SmcParams,
    e_hat: ErrorState,
    pi2_ddot_hat: float,
    pi4_hat: float,
    r_4: float,
    j_e: float,
) -> float:
    """tau_e = J_e rho sat(sigma-hat / epsilon) + J_e delta-hat."""
    sigma_hat = sliding_variable(params, e_hat)
    delta_hat = equivalent_term(params, e_hat, pi2_ddot_hat, pi4_hat, r_4)
    return j_e * params.rho * smooth_sign(sigma_hat, params.epsilon) + j_e * delta_hat


# -- Input loop --


def solve_input_loop(law_at: Callable[[float], float]) -> float:
    """Fixed point tau = law_at(tau) of a law that is affine in its assumed input.

    `law_at(u)` evaluates the control law with every input-dependent model
    term computed as if u were applied.
    """
    y0 = law_at(0.0)
    slope = law_at(1.0) - y0
    if slope == 1.0:
        raise ZeroDivisionError("control law has unit gain on its own input; loop is not solvable")
    return y0 / (1.0 - slope)


def clamp_torque(tau: float, limit: float) -> float:
    """Saturate |tau| to `limit`; limit 0 disables the clamp."""
    if limit <= 0.0:
        return tau
    return float(np.clip(tau, -limit, limit))


# -- Stiffness modulation --


def scalar_dob_estimate(z: float, dtheta_ms: float, j_ms: float, g_ms: float) -> float:
    """Lumped stiffness-mechanism disturbance read from the observer state."""
    return z - g_ms * j_ms * dtheta_ms


def scalar_dob_deriv(z: float, dtheta_ms: float, tau_ms: float, j_ms: float, g_ms: float) -> float:
    """First-order DOB on J_ms theta_ms'' = tau_ms - d, bandwidth g_ms."""
    return g_ms * (tau_ms - scalar_dob_estimate(z, dtheta_ms, j_ms, g_ms))


def scalar_dob_update(
    z: float,
    dtheta_ms: float,
    tau_ms: float,
    params: PlantParams,
    g_ms: float,
    h: float,
) -> tuple[float, float]:
    """Advance the observer one step with rate and input held; returns (z, d-hat)."""
    if not g_ms > 0:
        raise ValueError(f"stiffness DOB bandwidth must be positive, got {g_ms}")

    def f(_t, zz):
        return np.array([scalar_dob_deriv(float(zz[0]), dtheta_ms, tau_ms, params.j_ms, g_ms)])

    z_new = float(rk4_step(f, 0.0, np.array([z]), h)[0])
    return z_new, scalar_dob_estimate(z_new, dtheta_ms, params.j_ms, g_ms)


def stiffness_control(
    gains: StiffnessGains,
    theta_ms_ref: float,
    dtheta_ms_ref: float,
    s: StiffnessState,
    tau_ms_d_hat: float,
) -> float:
    """PD on the stiffness-motor position plus the DOB feedforward."""
    return (
        gains.kd * (dtheta_ms_ref - s.dtheta_ms)
        + gains.kp * (theta_ms_ref - s.theta_ms)
        + tau_ms_d_hat
    )
