"""Closed-loop scenario runs.

One fused state vector is advanced by RK4:

    [theta_l, dtheta_l, theta_e, dtheta_e, theta_ms, dtheta_ms]   plant
    [a0 (4), a1 (4), a2 (4)]                                      second-order DOB
    [z]                                                           stiffness DOB

By default both motor torques are computed once per step from the
step-start sample and held across the RK4 stages.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from vssea.core.config import (
    DEFAULT_DECIMATION,
    DEFAULT_DURATION,
    DEFAULT_STEP,
    TRACE_COLUMNS,
)
from vssea.core.control import (
    clamp_torque,
    scalar_dob_deriv,
    scalar_dob_estimate,
    sfb_control,
    sliding_variable,
    smc_control,
    solve_input_loop,
    stiffness_control,
)
from vssea.core.numkit import IntegrationError, rk4_step
from vssea.core.observer import (
    DisturbanceEstimate,
    ObserverSettings,
    extract_estimates,
    observer_deriv,
    observer_matrices,
)
from vssea.core.plant import (
    PlantParams,
    PlantState,
    SpringDomainError,
    StiffnessState,
    linear_matrices,
    plant_deriv,
)
from vssea.core.reconstruction import ErrorState, error_state, pi_terms
from vssea.core.serialization import config_digest
from vssea.core.synthesis import ControllerConfig, synthesize_gains
from vssea.core.validation import validate_scenario
from vssea.sim.disturbance import DisturbanceProfile, disturbance_eval, disturbance_truth
from vssea.sim.reference import ReferenceTrajectory, reference_eval

logger = logging.getLogger(__name__)

PLANT_SLICE = slice(0, 6)
DOB_SLICE = slice(6, 18)
Z_INDEX = 18
FUSED_SIZE = 19


@dataclass(frozen=True)
class SimSettings:
    step_s: float = DEFAULT_STEP
    duration_s: float = DEFAULT_DURATION
    decimation: int = DEFAULT_DECIMATION
    zero_order_hold: bool = True
    theta_l0: float = 0.0
    dtheta_l0: float = 0.0
    theta_e0: float = 0.0
    dtheta_e0: float = 0.0
    seed: int = 0

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.duration_s / self.step_s + 1e-9))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScenarioConfig:
    plant: PlantParams = field(default_factory=PlantParams)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    observer: ObserverSettings = field(default_factory=ObserverSettings)
    reference: ReferenceTrajectory = field(default_factory=ReferenceTrajectory)
    disturbance: DisturbanceProfile = field(default_factory=DisturbanceProfile)
    sim: SimSettings = field(default_factory=SimSettings)

    def to_dict(self) -> dict:
        return {
            "plant": self.plant.to_dict(),
            "controller": self.controller.to_dict(),
            "observer": self.observer.to_dict(),
            "reference": self.reference.to_dict(),
            "disturbance": self.disturbance.to_dict(),
            "sim": self.sim.to_dict(),
        }

    @property
    def digest(self) -> str:
        return config_digest(self.to_dict())


@dataclass(frozen=True)
class FaultHooks:
    """Deliberate model faults for the invariant suite; defaults are the healthy build.

    `matched_error` is added to the controller's matched-disturbance
    estimate (Pi4~-hat for state feedback, Pi4-hat for SMC), so the closed
    loop sees a known constant estimate error on top of its source.
    """

    pi2_inertia: float | None = None
    compensation_sign: float = 1.0
    matched_error: float = 0.0


@dataclass
class SimTrace:
    rows: list[tuple[float, ...]] = field(default_factory=list)
    amplitude: float = 1.0
    truncated: bool = False
    diagnostic: str = ""

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        i = TRACE_COLUMNS.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)

    @property
    def columns(self) -> dict[str, np.ndarray]:
        data = np.array(self.rows, dtype=float).reshape(len(self.rows), len(TRACE_COLUMNS))
        return {name: data[:, i] for i, name in enumerate(TRACE_COLUMNS)}


class SimulationDivergence(Exception):
    """The fused state left the finite reals (or the spring domain)."""

    def __init__(self, step: int, diagnostic: str, trace: SimTrace):
        self.step = step
        self.diagnostic = diagnostic
        self.trace = trace
        super().__init__(f"diverged at step {step}: {diagnostic}")


class ControlSample(NamedTuple):
    tau_e: float
    tau_ms: float
    noise: np.ndarray  # added to the sampled plant state, held over the step
    estimate: DisturbanceEstimate  # observer estimate (always)
    error: ErrorState
    sigma: float


class ClosedLoop:
    """Plant, observers and controllers of one scenario, wired for RK4."""

    def __init__(self, config: ScenarioConfig, hooks: FaultHooks = FaultHooks()):
        self.config = config
        self.hooks = hooks
        self.params = config.plant
        self.ctrl = config.controller
        self.dob_gains = config.observer.gains()
        A, B = linear_matrices(self.params)
        self.matrices = observer_matrices(A, B, self.dob_gains)
        self.sfb = synthesize_gains(self.ctrl).gains if self.ctrl.gain_method else None
        self.smc = self.ctrl.smc_params()
        self.stiffness = self.ctrl.stiffness_gains()
        self.rng = np.random.default_rng(config.sim.seed)

    def initial_state(self) -> np.ndarray:
        sim = self.config.sim
        y = np.zeros(FUSED_SIZE)
        y[0:4] = [sim.theta_l0, sim.dtheta_l0, sim.theta_e0, sim.dtheta_e0]
        y[4] = self.config.reference.stiffness_position
        # observer starts from D-hat = 0 at the initial state
        x = y[0:4]
        g = self.dob_gains
        y[DOB_SLICE] = np.concatenate([g.g0 * x, g.g1 * x, g.g2 * x])
        y[Z_INDEX] = self.stiffness.g_ms * self.params.j_ms * y[5]
        return y

    def sample_noise(self) -> np.ndarray:
        std = self.config.observer.noise_std
        if std > 0.0:
            return self.rng.normal(0.0, std, size=6)
        return np.zeros(6)

    def _source(self, t: float, est: DisturbanceEstimate) -> DisturbanceEstimate:
        if not self.ctrl.uses_disturbance_source:
            return DisturbanceEstimate.zero()
        if self.config.observer.mode == "truth":
            return disturbance_truth(self.params, self.config.disturbance, t)
        return est

    def control(self, t: float, y: np.ndarray, noise: np.ndarray) -> ControlSample:
        p = self.params
        meas = y[PLANT_SLICE] + noise
        state = PlantState.from_array(meas[0:4])
        est = extract_estimates(y[DOB_SLICE], meas[0:4], self.dob_gains, self.config.observer.projection)
        src = self._source(t, est)
        ref = reference_eval(self.config.reference, t)

        base = pi_terms(p, state, 0.0, src, self.hooks.pi2_inertia)
        e_hat = error_state(ref, state, base.pi2, base.pi2_dot)

        offset = self.hooks.matched_error
        if self.ctrl.law == "sfb":
            def law_at(u: float) -> float:
                pt = pi_terms(p, state, u, src, self.hooks.pi2_inertia)
                return sfb_control(
                    self.sfb, e_hat, pt.matched + offset, ref.r_4, p.j_e,
                    compensation_sign=self.hooks.compensation_sign,
                )
            tau_e = solve_input_loop(law_at)
        elif self.ctrl.law == "smc":
            def law_at(u: float) -> float:
                pt = pi_terms(p, state, u, src, self.hooks.pi2_inertia)
                return smc_control(self.smc, e_hat, pt.pi2_ddot, pt.pi4 + offset, ref.r_4, p.j_e)
            tau_e = solve_input_loop(law_at)
        else:
            tau_e = 0.0
        tau_e = clamp_torque(tau_e, self.ctrl.torque_limit)

        s = StiffnessState(float(meas[4]), float(meas[5]))
        tau_ms_hat = 0.0
        if self.ctrl.stiffness.dob:
            tau_ms_hat = scalar_dob_estimate(float(y[Z_INDEX]), s.dtheta_ms, p.j_ms, self.stiffness.g_ms)
        tau_ms = stiffness_control(
            self.stiffness, self.config.reference.stiffness_position, 0.0, s, tau_ms_hat
        )
        return ControlSample(tau_e, tau_ms, noise, est, e_hat, sliding_variable(self.smc, e_hat))

    def deriv(self, t: float, y: np.ndarray, sample: ControlSample) -> np.ndarray:
        x6 = y[PLANT_SLICE]
        d = disturbance_eval(self.config.disturbance, t)
        dy = np.empty(FUSED_SIZE)
        dy[PLANT_SLICE] = plant_deriv(self.params, x6, sample.tau_e, sample.tau_ms, d)
        meas = x6 + sample.noise
        dy[DOB_SLICE] = observer_deriv(y[DOB_SLICE], sample.tau_e, meas[0:4], self.matrices)
        dy[Z_INDEX] = scalar_dob_deriv(
            float(y[Z_INDEX]), float(meas[5]), sample.tau_ms, self.params.j_ms, self.stiffness.g_ms
        )
        return dy

    def step(self, t: float, y: np.ndarray, sample: ControlSample, h: float) -> np.ndarray:
        if self.config.sim.zero_order_hold:
            return rk4_step(lambda tt, yy: self.deriv(tt, yy, sample), t, y, h)
        return rk4_step(lambda tt, yy: self.deriv(tt, yy, self.control(tt, yy, sample.noise)), t, y, h)

    def row(self, t: float, y: np.ndarray, sample: ControlSample) -> tuple[float, ...]:
        p = self.params
        d = disturbance_eval(self.config.disturbance, t)
        e = sample.error
        return (
            t,
            reference_eval(self.config.reference, t).r,
            *(float(v) for v in y[0:4]),
            sample.tau_e,
            d.tau_l,
            d.tau_e,
            sample.estimate.link_torque(p)[0],
            sample.estimate.motor_torque(p)[0],
            sample.sigma,
            e.e1, e.e2, e.e3, e.e4,
        )


def run_scenario(config: ScenarioConfig, hooks: FaultHooks = FaultHooks()) -> SimTrace:
    """Simulate `config`; raises SimulationDivergence with the partial trace on blow-up."""
    validate_scenario(config)
    loop = ClosedLoop(config, hooks)
    sim = config.sim
    h = sim.step_s
    n = sim.n_steps
    trace = SimTrace(amplitude=abs(config.reference.amplitude))
    logger.info(
        f"scenario {config.digest}: controller={config.controller.kind} "
        f"observer={config.observer.mode} steps={n} h={h}"
    )

    y = loop.initial_state()
    k = 0
    try:
        for k in range(n + 1):
            t = k * h
            sample = loop.control(t, y, loop.sample_noise())
            if k % sim.decimation == 0:
                trace.rows.append(loop.row(t, y, sample))
            if k == n:
                break
            y = loop.step(t, y, sample, h)
            if not np.all(np.isfinite(y)):
                raise IntegrationError(f"non-finite state after step at t={t + h:.6g}")
    except (IntegrationError, SpringDomainError, ZeroDivisionError, OverflowError) as e:
        trace.truncated = True
        trace.diagnostic = str(e)
        logger.warning(f"scenario {config.digest} diverged at step {k}: {e}")
        raise SimulationDivergence(k, str(e), trace) from e

    logger.debug(f"scenario {config.digest} finished, {len(trace)} rows")
    return trace
