"""Controller configuration and gain synthesis with stability certificates."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from vssea.core.config import (
    DEFAULT_LQR_Q,
    DEFAULT_LQR_R,
    DEFAULT_POLE,
    DEFAULT_SMC_EPSILON,
    DEFAULT_SMC_RHO,
    DEFAULT_SMC_S,
    DEFAULT_STIFFNESS_DOB_BANDWIDTH,
    DEFAULT_STIFFNESS_KD,
    DEFAULT_STIFFNESS_KP,
)
from vssea.core.control import SfbGains, SmcParams, StiffnessGains
from vssea.core.numkit import (
    SynthesisError,
    chain_polynomial,
    characteristic_polynomial,
    controllability_rank,
    is_positive_definite,
    lyapunov_residual,
    newton_kleinman,
    pole_place_chain,
    routh_hurwitz,
    solve_lyapunov,
)
from vssea.core.observer import ObserverSettings, channel_polynomial, observer_matrices
from vssea.core.plant import PlantParams, linear_matrices
from vssea.core.reconstruction import gamma_model

logger = logging.getLogger(__name__)

CONTROLLER_KINDS = ("open", "pp", "lqr", "pp+dob", "lqr+dob", "smc")

# unit input channel of the chain error dynamics
CHAIN_INPUT = np.array([[0.0], [0.0], [0.0], [1.0]])


@dataclass(frozen=True)
class PolePlacementSettings:
    poles: tuple[complex, ...] = (DEFAULT_POLE,) * 4


@dataclass(frozen=True)
class LqrSettings:
    q: tuple[float, float, float, float] = DEFAULT_LQR_Q
    r: float = DEFAULT_LQR_R


@dataclass(frozen=True)
class SmcSettings:
    s: tuple[float, float, float] = DEFAULT_SMC_S
    rho: float = DEFAULT_SMC_RHO
    epsilon: float = DEFAULT_SMC_EPSILON


@dataclass(frozen=True)
class StiffnessSettings:
    kp: float = DEFAULT_STIFFNESS_KP
    kd: float = DEFAULT_STIFFNESS_KD
    dob_bandwidth: float = DEFAULT_STIFFNESS_DOB_BANDWIDTH
    dob: bool = True


@dataclass(frozen=True)
class ControllerConfig:
    """Tagged by `kind`; the settings block matching the kind is the live one.

    `+dob` kinds and `smc` feed the Pi-terms from the disturbance source;
    `pp` and `lqr` use the nominal model with the same gain K.
    """

    kind: str = "pp+dob"
    pole_placement: PolePlacementSettings = field(default_factory=PolePlacementSettings)
    lqr: LqrSettings = field(default_factory=LqrSettings)
    smc: SmcSettings = field(default_factory=SmcSettings)
    stiffness: StiffnessSettings = field(default_factory=StiffnessSettings)
    torque_limit: float = 0.0

    @property
    def law(self) -> str:
        """'open', 'sfb' or 'smc'."""
        if self.kind in ("pp", "lqr", "pp+dob", "lqr+dob"):
            return "sfb"
        return self.kind

    @property
    def uses_disturbance_source(self) -> bool:
        return self.kind.endswith("+dob") or self.kind == "smc"

    @property
    def gain_method(self) -> str | None:
        if self.kind.startswith("pp"):
            return "pole placement"
        if self.kind.startswith("lqr"):
            return "lqr"
        return None

    def smc_params(self) -> SmcParams:
        s1, s2, s3 = self.smc.s
        return SmcParams((s1, s2, s3, 1.0), self.smc.rho, self.smc.epsilon)

    def stiffness_gains(self) -> StiffnessGains:
        return StiffnessGains(self.stiffness.kp, self.stiffness.kd, self.stiffness.dob_bandwidth)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "poles": [[p.real, p.imag] for p in map(complex, self.pole_placement.poles)],
            "lqr_q": list(self.lqr.q),
            "lqr_r": self.lqr.r,
            "smc_s": list(self.smc.s),
            "smc_rho": self.smc.rho,
            "smc_epsilon": self.smc.epsilon,
            "stiffness_kp": self.stiffness.kp,
            "stiffness_kd": self.stiffness.kd,
            "stiffness_dob_bandwidth": self.stiffness.dob_bandwidth,
            "stiffness_dob": self.stiffness.dob,
            "torque_limit": self.torque_limit,
        }


@dataclass(frozen=True)
class LyapunovCertificate:
    P: np.ndarray
    residual: float
    positive_definite: bool
    eig_min: float
    eig_max: float


@dataclass(frozen=True)
class GainSynthesis:
    gains: SfbGains
    method: str
    polynomial: Polynomial
    care_iterations: int = 0
    care_residual: float = 0.0
    certificate: LyapunovCertificate | None = None


def chain_closed_loop(K) -> np.ndarray:
    """Gamma - b K^T for the unit-input chain."""
    gamma, _ = gamma_model(1.0)
    return gamma - CHAIN_INPUT @ np.asarray(K, dtype=float).reshape(1, 4)


def lyapunov_certificate(gains: SfbGains) -> LyapunovCertificate:
    """Solve (Gamma - b K^T)^T P + P (Gamma - b K^T) = -I and check P > 0."""
    A_cl = chain_closed_loop(gains.K)
    if not routh_hurwitz(chain_polynomial(gains.K)):
        raise SynthesisError(f"closed loop for K={list(gains.K)} is not Hurwitz")
    Q = np.eye(4)
    P = solve_lyapunov(A_cl, Q)
    pd = is_positive_definite(P)
    eigs = np.linalg.eigvalsh(P)
    cert = LyapunovCertificate(P, lyapunov_residual(A_cl, P, Q), pd, float(eigs[0]), float(eigs[-1]))
    if not pd:
        raise SynthesisError(f"Lyapunov matrix is not positive definite (min eigenvalue {eigs[0]:.3e})")
    return cert


def synthesize_gains(ctrl: ControllerConfig) -> GainSynthesis:
    """Chain gain K by pole placement or LQR, certified by a Lyapunov solve."""
    method = ctrl.gain_method
    if method == "pole placement":
        K = pole_place_chain(ctrl.pole_placement.poles)
        iterations, residual = 0, 0.0
    elif method == "lqr":
        gamma, _ = gamma_model(1.0)
        sol = newton_kleinman(gamma, CHAIN_INPUT, np.diag(ctrl.lqr.q), np.array([[ctrl.lqr.r]]))
        K = sol.K.reshape(4)
        iterations, residual = sol.iterations, sol.residual
        logger.debug(f"lqr gain {K} after {iterations} iterations, residual {residual:.3e}")
    else:
        raise SynthesisError(f"controller kind {ctrl.kind!r} has no state-feedback gain")
    gains = SfbGains(tuple(float(k) for k in K))
    return GainSynthesis(
        gains=gains,
        method=method,
        polynomial=chain_polynomial(K),
        care_iterations=iterations,
        care_residual=residual,
        certificate=lyapunov_certificate(gains),
    )


@dataclass(frozen=True)
class SynthesisReport:
    chain_rank: int
    plant_rank: int
    gain: GainSynthesis | None
    smc_hurwitz: bool | None
    observer_gains: tuple[float, float, float]
    observer_hurwitz: bool
    observer_matrix_hurwitz: bool


def synthesize(plant: PlantParams, ctrl: ControllerConfig, observer: ObserverSettings) -> SynthesisReport:
    """Everything `vssea synthesize` prints; raises SynthesisError on a failed certificate."""
    gamma, B = gamma_model(plant.j_e)
    A, B_lin = linear_matrices(plant)
    chain_rank = controllability_rank(gamma, B)
    if chain_rank < 4:
        raise SynthesisError(f"chain model rank {chain_rank} < 4")

    gain = synthesize_gains(ctrl) if ctrl.gain_method else None

    smc_hurwitz = None
    if ctrl.kind == "smc":
        s1, s2, s3 = ctrl.smc.s
        smc_hurwitz = routh_hurwitz(Polynomial([s1, s2, s3, 1.0]))
        if not smc_hurwitz:
            raise SynthesisError(f"sliding manifold {ctrl.smc.s} is not Hurwitz")

    dob = observer.gains()
    obs_hurwitz = routh_hurwitz(Polynomial(channel_polynomial(dob)))
    lam_a = observer_matrices(A, B_lin, dob).lam_a
    # the 12x12 polynomial is the channel cubic to the 4th power; test one block
    matrix_hurwitz = routh_hurwitz(characteristic_polynomial(lam_a[::4, ::4]))
    if not (obs_hurwitz and matrix_hurwitz):
        raise SynthesisError("observer error dynamics are not Hurwitz")

    return SynthesisReport(
        chain_rank=chain_rank,
        plant_rank=controllability_rank(A, B_lin),
        gain=gain,
        smc_hurwitz=smc_hurwitz,
        observer_gains=(dob.g0, dob.g1, dob.g2),
        observer_hurwitz=obs_hurwitz,
        observer_matrix_hurwitz=matrix_hurwitz,
    )
