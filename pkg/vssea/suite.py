"""Named invariant checks behind `vssea validate`.

Each check returns (passed, detail). FaultHooks injects the model faults
the suite must be able to see (a wrong Pi2 denominator, a flipped
compensation sign) and the bounded estimate errors the robustness checks
push through the loop on purpose.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from vssea.core.config import LYAPUNOV_RESIDUAL_TOL, CARE_RESIDUAL_TOL
from vssea.core.control import StiffnessGains, scalar_dob_update, stiffness_control
from vssea.core.numkit import (
    care_residual,
    controllability_rank,
    is_hurwitz,
    newton_kleinman,
    rk4_step,
)
from vssea.core.observer import (
    DobGains,
    ObserverSettings,
    auxiliary_from_disturbance,
    design_gains,
    extract_estimates,
    observer_deriv,
    observer_matrices,
)
from vssea.core.plant import (
    DisturbanceSample,
    PlantParams,
    PlantState,
    StiffnessState,
    linear_deriv,
    linear_matrices,
    mechanical_energy,
    plant_deriv,
    spring_stiffness,
    spring_torque,
    stiffness_mech_deriv,
)
from vssea.core.reconstruction import gamma_form_deriv, gamma_model
from vssea.core.synthesis import ControllerConfig, chain_closed_loop, synthesize_gains
from vssea.io.configfile import parse_config
from vssea.io.csvfile import trace_to_text
from vssea.sim.disturbance import ChannelProfile, DisturbanceProfile
from vssea.sim.metrics import rms, settling_time
from vssea.sim.reference import ReferenceTrajectory
from vssea.sim.scenario import (
    FaultHooks,
    ScenarioConfig,
    SimSettings,
    SimulationDivergence,
    run_scenario,
)

logger = logging.getLogger(__name__)

# constant matched estimate errors for the ultimate-boundedness check, largest first
BOUNDEDNESS_LEVELS = (10.0, 1.0, 0.1)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


# -- Reusable simulations --


def simulate_observer(
    params: PlantParams,
    gains: DobGains,
    d_fn: Callable[[float], tuple[np.ndarray, np.ndarray, np.ndarray]],
    duration: float,
    h: float,
    x0=(0.0, 0.0, 0.0, 0.0),
    exact_start: bool = False,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unforced linear plant driven by D(t), observed by the second-order DOB.

    Returns (t, stacked auxiliary error norm, max |D-hat - D| per sample).
    """
    A, B = linear_matrices(params)
    m = observer_matrices(A, B, gains)

    def f(t, y):
        x, a = y[:4], y[4:]
        d = d_fn(t)[0]
        return np.concatenate([A @ x - d, observer_deriv(a, 0.0, x, m)])

    y = np.zeros(16)
    y[:4] = x0
    if exact_start:
        y[4:] = auxiliary_from_disturbance(*d_fn(0.0), y[:4], gains)
    else:
        y[4:] = auxiliary_from_disturbance(np.zeros(4), np.zeros(4), np.zeros(4), y[:4], gains)
    n = int(round(duration / h))
    times, aux_err, d_err = [], [], []
    for k in range(n + 1):
        t = k * h
        truth = d_fn(t)
        exact = auxiliary_from_disturbance(*truth, y[:4], gains)
        est = extract_estimates(y[4:], y[:4], gains, project=False)
        times.append(t)
        aux_err.append(float(np.linalg.norm(y[4:] - exact)))
        d_err.append(float(np.max(np.abs(est.d - truth[0]))))
        if k < n:
            y = rk4_step(f, t, y, h)
    return np.array(times), np.array(aux_err), np.array(d_err)


def simulate_stiffness_loop(
    params: PlantParams,
    gains: StiffnessGains,
    theta_ref: float,
    load: float,
    dob: bool,
    duration: float,
    h: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Stiffness mechanism under a constant load torque; returns (t, theta_ms)."""
    s = StiffnessState(theta_ref)
    z = gains.g_ms * params.j_ms * s.dtheta_ms
    d_hat = 0.0
    n = int(round(duration / h))
    times, thetas = [0.0], [s.theta_ms]
    for k in range(n):
        tau = stiffness_control(gains, theta_ref, 0.0, s, d_hat if dob else 0.0)

        def f(_t, y, tau=tau):
            ds = stiffness_mech_deriv(params, StiffnessState(y[0], y[1]), tau, 0.0, load)
            return np.array([ds.theta_ms, ds.dtheta_ms])

        y = rk4_step(f, k * h, np.array([s.theta_ms, s.dtheta_ms]), h)
        z, d_hat = scalar_dob_update(z, s.dtheta_ms, tau, params, gains.g_ms, h)
        s = StiffnessState(float(y[0]), float(y[1]))
        times.append((k + 1) * h)
        thetas.append(s.theta_ms)
    return np.array(times), np.array(thetas)


def linear_error_response(K, e0: np.ndarray, times: np.ndarray, h: float) -> np.ndarray:
    """e' = (Gamma - b K^T) e from e0, sampled at `times` (multiples of h)."""
    A_cl = chain_closed_loop(K)
    out = np.empty((len(times), 4))
    e = np.asarray(e0, dtype=float)
    t = 0.0
    step = 0
    for i, target in enumerate(times):
        n_target = int(round(target / h))
        while step < n_target:
            e = rk4_step(lambda _t, x: A_cl @ x, t, e, h)
            step += 1
            t = step * h
        out[i] = e
    return out


def fidelity_config(kind: str = "pp+dob") -> ScenarioConfig:
    """Exact disturbance feedback, continuous control, smooth disturbances from t = 0."""
    return ScenarioConfig(
        controller=ControllerConfig(kind=kind),
        observer=ObserverSettings(mode="truth"),
        disturbance=DisturbanceProfile(
            link=ChannelProfile(0.0, 0.3, math.pi),
            motor=ChannelProfile(0.0, 0.2, 2.0 * math.pi),
            t_on=0.0,
            t_off=1e3,
        ),
        sim=SimSettings(step_s=1e-4, duration_s=1.0, decimation=100, zero_order_hold=False),
    )


def _window_error(trace, t0: float, t1: float) -> np.ndarray:
    cols = trace.columns
    t = cols["t"]
    return cols["e1"][(t >= t0) & (t < t1)]


# -- Checks --


def check_controllability(hooks: FaultHooks) -> tuple[bool, str]:
    gamma, B = gamma_model(PlantParams().j_e)
    rank = controllability_rank(gamma, B)
    return rank == 4, f"rank {rank}"


def check_representation_equivalence(hooks: FaultHooks) -> tuple[bool, str]:
    """Linear and integrator-chain forms agree under random inputs (5 s, h = 1e-4)."""
    params = PlantParams()
    rng = np.random.default_rng(7)
    h, n = 1e-4, 50_000
    xa = xb = rng.normal(0.0, 0.1, size=4)
    worst = 0.0
    for k in range(n):
        u = float(rng.normal())
        d = DisturbanceSample(float(rng.normal()), float(rng.normal()))
        t = k * h
        xa = rk4_step(lambda _t, x: linear_deriv(params, x, u, d), t, xa, h)
        xb = rk4_step(lambda _t, x: gamma_form_deriv(params, x, u, d, hooks.pi2_inertia), t, xb, h)
        worst = max(worst, float(np.max(np.abs(xa - xb))))
        if worst > 1e-8:
            return False, f"deviation {worst:.3e} at t={t + h:.4f}"
    return True, f"max deviation {worst:.3e}"


def check_lyapunov_certificate(hooks: FaultHooks) -> tuple[bool, str]:
    parts = []
    for kind in ("pp+dob", "lqr+dob"):
        cert = synthesize_gains(ControllerConfig(kind=kind)).certificate
        bound = LYAPUNOV_RESIDUAL_TOL * 2.0  # ||I_4||_F
        if cert.residual > bound or not cert.positive_definite:
            return False, f"{kind}: residual {cert.residual:.3e}, eig_min {cert.eig_min:.3e}"
        parts.append(f"{kind} residual {cert.residual:.1e}")
    return True, ", ".join(parts)


def random_stabilizable(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n = int(rng.integers(2, 5))
    m = int(rng.integers(1, 3))
    while True:
        A = rng.normal(size=(n, n))
        B = rng.normal(size=(n, m))
        if controllability_rank(A, B) == n:
            return A, B


def check_care(hooks: FaultHooks) -> tuple[bool, str]:
    rng = np.random.default_rng(11)
    gamma, _ = gamma_model(1.0)
    systems = [(gamma, np.array([[0.0], [0.0], [0.0], [1.0]]))]
    systems += [random_stabilizable(rng) for _ in range(100)]
    worst = 0.0
    for i, (A, B) in enumerate(systems):
        n, m = B.shape
        Q, R = np.eye(n), np.eye(m)
        sol = newton_kleinman(A, B, Q, R)
        res = care_residual(A, B, Q, R, sol.P) / (1.0 + float(np.linalg.norm(sol.P)))
        worst = max(worst, res)
        if res > CARE_RESIDUAL_TOL or not is_hurwitz(A - B @ sol.K):
            return False, f"system {i}: scaled residual {res:.3e}"
    return True, f"{len(systems)} systems, worst scaled residual {worst:.1e}"


def check_nominal_pole_fidelity(hooks: FaultHooks) -> tuple[bool, str]:
    config = fidelity_config()
    trace = run_scenario(config, hooks)
    cols = trace.columns
    e = np.column_stack([cols[f"e{i}"] for i in range(1, 5)])
    K = synthesize_gains(config.controller).gains.K
    expected = linear_error_response(K, e[0], cols["t"], config.sim.step_s)
    dev = float(np.max(np.abs(e - expected)))
    return dev < 1e-6, f"max deviation {dev:.3e}"


def check_dob_convergence(hooks: FaultHooks) -> tuple[bool, str]:
    """Quadratic D: max |D-hat - D| below 1e-6 of initial by t = 25/omega, decay rate near omega."""
    omega = 100.0
    c0, c1, c2 = (np.array([0.0, v, 0.0, w]) for v, w in ((2.0, 0.5), (1.0, -0.4), (0.5, 0.3)))

    def d_fn(t):
        return c0 + c1 * t + c2 * t * t, c1 + 2.0 * c2 * t, 2.0 * c2

    t, _, err = simulate_observer(PlantParams(), design_gains(omega), d_fn, 25.0 / omega, 1e-4)
    rel = err[-1] / err[0]
    fit = (t >= 10.0 / omega) & (err > 0)
    rate = -np.polyfit(t[fit], np.log(err[fit]), 1)[0]
    ok = rel < 1e-6 and abs(rate - omega) <= 0.25 * omega
    return ok, f"relative error {rel:.2e}, fitted rate {rate:.1f} (omega {omega})"


def check_dob_bandwidth(hooks: FaultHooks) -> tuple[bool, str]:
    """10x bandwidth cuts the steady sinusoidal estimation error by at least 20x."""
    amp = np.array([0.0, 10.0, 0.0, 2.0])

    def d_fn(t):
        return amp * math.sin(t), amp * math.cos(t), -amp * math.sin(t)

    errors = []
    for omega in (10.0, 100.0):
        t, _, d_err = simulate_observer(PlantParams(), design_gains(omega), d_fn, 3.0, 5e-4, exact_start=True)
        errors.append(float(np.max(d_err[t >= 1.5])))
    ratio = errors[0] / errors[1]
    return ratio >= 20.0, f"errors {errors[0]:.2e} -> {errors[1]:.2e}, ratio {ratio:.0f}"


def check_compensation_contrast(hooks: FaultHooks) -> tuple[bool, str]:
    """Same K: compensation off leaves >= 10x the in-window error.

    The step response with the DOB in the loop must also settle within 5%
    of the bare pole-placement loop running with no disturbance at all.
    """
    base = ScenarioConfig()
    t_on, t_off = base.disturbance.t_on, base.disturbance.t_off
    on = run_scenario(replace(base, controller=ControllerConfig(kind="pp+dob")), hooks)
    off = run_scenario(replace(base, controller=ControllerConfig(kind="pp")), hooks)
    bare = run_scenario(
        replace(base, controller=ControllerConfig(kind="pp"), disturbance=DisturbanceProfile.none()),
        hooks,
    )
    err_on = float(np.mean(np.abs(_window_error(on, t_off - 1.0, t_off))))
    err_off = float(np.mean(np.abs(_window_error(off, t_off - 1.0, t_off))))
    ratio = err_off / max(err_on, 1e-300)
    cols_on, cols_bare = on.columns, bare.columns
    before = cols_on["t"] < t_on
    ts_on = settling_time(cols_on["t"][before], cols_on["e1"][before], on.amplitude)
    ts_bare = settling_time(cols_bare["t"][before], cols_bare["e1"][before], bare.amplitude)
    same_speed = ts_on is not None and ts_bare is not None and abs(ts_on - ts_bare) <= 0.05 * ts_bare
    return ratio >= 10.0 and same_speed, (
        f"error ratio {ratio:.1f}, settling {ts_on} vs bare pole placement {ts_bare}"
    )


def smc_reaching_config(duration: float) -> ScenarioConfig:
    """SMC on exact estimates, default disturbance present from t = 0 on, every step logged."""
    return ScenarioConfig(
        controller=ControllerConfig(kind="smc"),
        observer=ObserverSettings(mode="truth"),
        disturbance=replace(DisturbanceProfile(), t_on=0.0, t_off=duration + 1.0),
        sim=SimSettings(duration_s=duration, decimation=1),
    )


def sigma_reaching(trace, epsilon: float, h: float) -> tuple[bool, str]:
    """sigma enters |sigma| <= epsilon, never leaves, and sigma^2 never grows before that."""
    sigma = trace.column("sigma")
    inside = np.flatnonzero(np.abs(sigma) <= epsilon)
    if inside.size == 0:
        return False, f"never reached |sigma| <= {epsilon}, final {sigma[-1]:.3e}"
    first = int(inside[0])
    contained = bool(np.all(np.abs(sigma[first:]) <= epsilon * (1.0 + 1e-9)))
    # every sample before `first` is outside the band
    shrinking = bool(np.all(np.diff(sigma[: first + 1] ** 2) <= 0.0))
    return contained and shrinking, (
        f"reached at {first * h:.3f} s, contained={contained}, monotone={shrinking}"
    )


def check_smc_reaching(hooks: FaultHooks) -> tuple[bool, str]:
    """Exact estimates: sigma reaches the boundary layer, stays there, and shrinks outside it."""
    config = smc_reaching_config(2.5)
    trace = run_scenario(config, hooks)
    return sigma_reaching(trace, config.controller.smc.epsilon, config.sim.step_s)


def check_smc_estimate_error(hooks: FaultHooks) -> tuple[bool, str]:
    """A constant matched estimate error of half rho, either sign, still lets sigma reach the band."""
    config = smc_reaching_config(4.0)
    half_rho = 0.5 * config.controller.smc.rho
    details = []
    for level in (half_rho, -half_rho):
        trace = run_scenario(config, replace(hooks, matched_error=level))
        ok, detail = sigma_reaching(trace, config.controller.smc.epsilon, config.sim.step_s)
        details.append(f"{level:+g}: {detail}")
        if not ok:
            return False, "; ".join(details)
    return True, "; ".join(details)


def check_ultimate_boundedness(hooks: FaultHooks) -> tuple[bool, str]:
    """State feedback at rest: the final-second error bound shrinks with the matched estimate error."""
    config = ScenarioConfig(
        controller=ControllerConfig(kind="pp+dob"),
        observer=ObserverSettings(mode="truth"),
        reference=ReferenceTrajectory(amplitude=0.0),
        disturbance=DisturbanceProfile.none(),
        sim=SimSettings(duration_s=4.0, decimation=10),
    )
    bounds = []
    for level in BOUNDEDNESS_LEVELS:
        cols = run_scenario(config, replace(hooks, matched_error=level)).columns
        e = np.column_stack([cols[f"e{i}"] for i in range(1, 5)])
        tail = cols["t"] >= config.sim.duration_s - 1.0
        bounds.append(float(np.max(np.linalg.norm(e[tail], axis=1))))
    ok = all(b > 0.0 for b in bounds) and all(a > 5.0 * b for a, b in zip(bounds, bounds[1:]))
    return ok, ", ".join(f"{lvl:g} -> {b:.3e}" for lvl, b in zip(BOUNDEDNESS_LEVELS, bounds))


def check_disturbance_window(hooks: FaultHooks) -> tuple[bool, str]:
    """Robust controllers: in-window |e1| < 10x pre-disturbance RMS, back below 2x within 1 s."""
    base = ScenarioConfig()
    t_on, t_off = base.disturbance.t_on, base.disturbance.t_off
    details = []
    for kind in ("pp+dob", "smc"):
        trace = run_scenario(replace(base, controller=ControllerConfig(kind=kind)), hooks)
        pre = rms(_window_error(trace, t_on - 1.0, t_on))
        peak = float(np.max(np.abs(_window_error(trace, t_on, t_off))))
        after = float(np.max(np.abs(_window_error(trace, t_off + 1.0, base.sim.duration_s + 1.0))))
        details.append(f"{kind}: peak {peak / pre:.1f}x, after {after / pre:.2f}x")
        if peak >= 10.0 * pre or after >= 2.0 * pre:
            return False, "; ".join(details)
    return True, "; ".join(details)


def check_stiffness_loop(hooks: FaultHooks) -> tuple[bool, str]:
    params = PlantParams()
    gains = ControllerConfig().stiffness_gains()
    ref, load = 0.1, 0.05
    errs = []
    for dob in (True, False):
        _, theta = simulate_stiffness_loop(params, gains, ref, load, dob, 3.0, 1e-3)
        errs.append(abs(theta[-1] - ref))
    ratio = errs[0] / errs[1]
    return ratio < 0.01, f"steady error {errs[0]:.2e} with DOB, {errs[1]:.2e} without"


def check_spring(hooks: FaultHooks) -> tuple[bool, str]:
    params = PlantParams()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        theta = float(rng.uniform(params.theta_ms_min, 0.5))
        delta = float(rng.uniform(-1.0, 1.0))
        if spring_torque(params, theta, -delta) != -spring_torque(params, theta, delta):
            return False, f"torque not odd at ({theta}, {delta})"
        if spring_stiffness(params, theta, -delta) != spring_stiffness(params, theta, delta):
            return False, f"stiffness not even at ({theta}, {delta})"
        step = 1e-5
        fd = (spring_torque(params, theta, delta + step) - spring_torque(params, theta, delta - step)) / (2 * step)
        rel = abs(fd - spring_stiffness(params, theta, delta)) / abs(spring_stiffness(params, theta, delta))
        worst = max(worst, rel)
    return worst < 1e-6, f"worst relative finite-difference gap {worst:.1e}"


def check_energy(hooks: FaultHooks) -> tuple[bool, str]:
    """Frictionless unforced plant conserves mechanical energy over 10 s at h = 1e-4."""
    params = PlantParams(b_l=0.0, b_e=0.0)
    x = np.array([0.1, 0.0, -0.05, 0.2, 0.1, 0.0])
    e0 = mechanical_energy(params, PlantState.from_array(x))
    h, n = 1e-4, 100_000
    zero = DisturbanceSample()
    for k in range(n):
        x = rk4_step(lambda _t, y: plant_deriv(params, y, 0.0, 0.0, zero), k * h, x, h)
    drift = abs(mechanical_energy(params, PlantState.from_array(x)) - e0) / e0
    return drift < 1e-6, f"relative drift {drift:.2e}"


def check_rk4_order(hooks: FaultHooks) -> tuple[bool, str]:
    params = PlantParams()
    x0 = np.array([0.1, 0.0, 0.0, 0.0])
    d = DisturbanceSample(0.1, 0.0)

    def integrate(h):
        x = x0
        for k in range(int(round(0.5 / h))):
            x = rk4_step(lambda _t, y: linear_deriv(params, y, 1.0, d), k * h, x, h)
        return x

    ref = integrate(0.01 / 64)
    e1 = float(np.max(np.abs(integrate(0.01) - ref)))
    e2 = float(np.max(np.abs(integrate(0.005) - ref)))
    order = math.log2(e1 / e2)
    return order >= 3.7, f"observed order {order:.2f}"


def check_step_size_robustness(hooks: FaultHooks) -> tuple[bool, str]:
    """Continuous control, smooth disturbance: halving h moves the final state < 1e-6 relative."""
    cfg = replace(fidelity_config(), observer=ObserverSettings(bandwidth=20.0))
    finals = []
    for h in (1e-3, 5e-4):
        trace = run_scenario(replace(cfg, sim=replace(cfg.sim, step_s=h, decimation=int(round(0.01 / h)))), hooks)
        cols = trace.columns
        finals.append(np.array([cols[c][-1] for c in ("theta_l", "dtheta_l", "theta_e", "dtheta_e")]))
    rel = float(np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1]))
    return rel < 1e-6, f"relative change {rel:.2e}"


def check_determinism(hooks: FaultHooks) -> tuple[bool, str]:
    config = replace(ScenarioConfig(), sim=SimSettings(duration_s=4.0))
    first = trace_to_text(run_scenario(config, hooks))
    second = trace_to_text(run_scenario(config, hooks))
    return first == second, f"{len(first)} bytes, identical={first == second}"


def check_override_order(hooks: FaultHooks) -> tuple[bool, str]:
    overrides = ["controller.kind=lqr+dob", "observer.bandwidth=20", "sim.step_s=5e-4", "plant.k=120"]
    configs = {parse_config("", list(p)) for p in itertools.permutations(overrides)}
    return len(configs) == 1, f"{len(configs)} distinct configs over all orders"


CHECKS: dict[str, Callable[[FaultHooks], tuple[bool, str]]] = {
    "controllability": check_controllability,
    "representation-equivalence": check_representation_equivalence,
    "lyapunov-certificate": check_lyapunov_certificate,
    "care-correctness": check_care,
    "nominal-pole-fidelity": check_nominal_pole_fidelity,
    "dob-convergence": check_dob_convergence,
    "dob-bandwidth": check_dob_bandwidth,
    "compensation-contrast": check_compensation_contrast,
    "smc-reaching": check_smc_reaching,
    "smc-estimate-error": check_smc_estimate_error,
    "ultimate-boundedness": check_ultimate_boundedness,
    "disturbance-window": check_disturbance_window,
    "stiffness-loop": check_stiffness_loop,
    "spring-consistency": check_spring,
    "energy-conservation": check_energy,
    "rk4-order": check_rk4_order,
    "step-size-robustness": check_step_size_robustness,
    "determinism": check_determinism,
    "override-order": check_override_order,
}


@dataclass(frozen=True)
class SuiteReport:
    results: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def run_check(name: str, hooks: FaultHooks = FaultHooks()) -> CheckResult:
    try:
        passed, detail = CHECKS[name](hooks)
    except SimulationDivergence as e:
        passed, detail = False, f"diverged: {e}"
    except Exception as e:  # a crashing check is a failing check
        logger.debug(f"check {name} raised", exc_info=True)
        passed, detail = False, f"{type(e).__name__}: {e}"
    return CheckResult(name, bool(passed), detail)


def run_suite(hooks: FaultHooks = FaultHooks(), names: list[str] | None = None) -> SuiteReport:
    selected = names or list(CHECKS)
    unknown = [n for n in selected if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    results = []
    for name in selected:
        result = run_check(name, hooks)
        logger.info(f"check {name}: {'pass' if result.passed else 'FAIL'} ({result.detail})")
        results.append(result)
    return SuiteReport(tuple(results))
