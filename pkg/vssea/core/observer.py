"""Second-order disturbance observer.

The observer tracks the auxiliary vectors

    a0 = D + g0 x,   a1 = D' + g1 x,   a2 = D'' + g2 x

of the four-state model x' = A x + B u - D, neglecting D''' in their
dynamics. Estimates of D and its first two derivatives are read back by
subtracting the state terms.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from vssea.core.config import DEFAULT_OBSERVER_BANDWIDTH
from vssea.core.plant import PlantParams
from vssea.core.validation import ValidationError, validate_dob_gains

# channels of D that link and motor torques can excite
ACTIVE_CHANNELS = (1, 3)
_PROJECTION = np.array([0.0, 1.0, 0.0, 1.0])


@dataclass(frozen=True)
class DobGains:
    g0: float
    g1: float
    g2: float

    def to_dict(self) -> dict:
        return {"g0": self.g0, "g1": self.g1, "g2": self.g2}


@dataclass(frozen=True)
class DisturbanceEstimate:
    """D-hat and its first two time derivatives, each a 4-vector."""

    d: np.ndarray
    d_dot: np.ndarray
    d_ddot: np.ndarray

    @classmethod
    def zero(cls) -> DisturbanceEstimate:
        return cls(np.zeros(4), np.zeros(4), np.zeros(4))

    @classmethod
    def from_torques(
        cls,
        params: PlantParams,
        tau_l: tuple[float, float, float],
        tau_e: tuple[float, float, float],
    ) -> DisturbanceEstimate:
        """Build from (value, rate, acceleration) of the link and motor torques."""
        cols = [
            np.array([0.0, tau_l[i] / params.j_l, 0.0, tau_e[i] / params.j_e]) for i in range(3)
        ]
        return cls(*cols)

    def link_torque(self, params: PlantParams) -> tuple[float, float, float]:
        """(tau_l, tau_l', tau_l'') recovered from channel 2."""
        return (
            params.j_l * float(self.d[1]),
            params.j_l * float(self.d_dot[1]),
            params.j_l * float(self.d_ddot[1]),
        )

    def motor_torque(self, params: PlantParams) -> tuple[float, float, float]:
        """(tau_e, tau_e', tau_e'') recovered from channel 4."""
        return (
            params.j_e * float(self.d[3]),
            params.j_e * float(self.d_dot[3]),
            params.j_e * float(self.d_ddot[3]),
        )


class ObserverMatrices(NamedTuple):
    lam_a: np.ndarray  # 12x12
    lam_u: np.ndarray  # 12
    lam_x: np.ndarray  # 12x4


def design_gains(omega: float) -> DobGains:
    """Triple pole at -omega: (s + omega)^3."""
    if not omega > 0:
        raise ValidationError(f"observer bandwidth must be > 0, got {omega}", "observer.bandwidth")
    return DobGains(3.0 * omega, 3.0 * omega**2, omega**3)


def channel_polynomial(gains: DobGains) -> np.ndarray:
    """Ascending coefficients of lambda^3 + g0 lambda^2 + g1 lambda + g2."""
    return np.array([gains.g2, gains.g1, gains.g0, 1.0])


def observer_matrices(A: np.ndarray, B: np.ndarray, gains: DobGains) -> ObserverMatrices:
    validate_dob_gains(gains)
    g0, g1, g2 = gains.g0, gains.g1, gains.g2
    eye = np.eye(4)
    zero = np.zeros((4, 4))
    lam_a = np.block([
        [-g0 * eye, eye, zero],
        [-g1 * eye, zero, eye],
        [-g2 * eye, zero, zero],
    ])
    b = np.asarray(B, dtype=float).reshape(4)
    lam_u = np.concatenate([g0 * b, g1 * b, g2 * b])
    shifted = A + g0 * eye
    lam_x = np.vstack([
        g0 * shifted - g1 * eye,
        g1 * shifted - g2 * eye,
        g2 * shifted,
    ])
    return ObserverMatrices(lam_a, lam_u, lam_x)


def observer_deriv(a_hat: np.ndarray, u: float, x: np.ndarray, m: ObserverMatrices) -> np.ndarray:
    """a-hat' = Lambda_a a-hat + Lambda_u u + Lambda_x x."""
    return m.lam_a @ a_hat + m.lam_u * u + m.lam_x @ x


def auxiliary_from_disturbance(
    d: np.ndarray, d_dot: np.ndarray, d_ddot: np.ndarray, x: np.ndarray, gains: DobGains
) -> np.ndarray:
    """Exact auxiliary vector for known D, D', D'' at state x."""
    x = np.asarray(x, dtype=float)
    return np.concatenate([d + gains.g0 * x, d_dot + gains.g1 * x, d_ddot + gains.g2 * x])


def extract_estimates(
    a_hat: np.ndarray, x: np.ndarray, gains: DobGains, project: bool = True
) -> DisturbanceEstimate:
    """Invert the auxiliary definitions; optionally zero channels 1 and 3."""
    a_hat = np.asarray(a_hat, dtype=float)
    x = np.asarray(x, dtype=float)
    d = a_hat[0:4] - gains.g0 * x
    d_dot = a_hat[4:8] - gains.g1 * x
    d_ddot = a_hat[8:12] - gains.g2 * x
    if project:
        d, d_dot, d_ddot = d * _PROJECTION, d_dot * _PROJECTION, d_ddot * _PROJECTION
    return DisturbanceEstimate(d, d_dot, d_ddot)


@dataclass(frozen=True)
class ObserverSettings:
    """Observer section of a scenario.

    g0..g2 left as None are placed from `bandwidth` as a triple pole.
    `mode` picks what feeds the Pi-terms: the observer ("estimate") or the
    exact analytic disturbances ("truth").
    """

    bandwidth: float = DEFAULT_OBSERVER_BANDWIDTH
    g0: float | None = None
    g1: float | None = None
    g2: float | None = None
    projection: bool = True
    mode: str = "estimate"
    noise_std: float = 0.0

    def gains(self) -> DobGains:
        explicit = (self.g0, self.g1, self.g2)
        if all(g is None for g in explicit):
            return design_gains(self.bandwidth)
        if any(g is None for g in explicit):
            raise ValidationError("set all of g0, g1, g2 or none of them", "observer.g0")
        return DobGains(float(self.g0), float(self.g1), float(self.g2))

    def to_dict(self) -> dict:
        return asdict(self)
