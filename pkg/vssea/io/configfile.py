"""Flat sectioned key-value scenario files.

    # comment
    [plant]
    k = 100
    spring = nonlinear

    [controller]
    kind = lqr+dob
    poles = -8, -8, -2+1j, -2-1j

Sections: plant, controller, observer, reference, disturbance, sim.
Values are numbers, booleans (true/false), enum words, or comma-separated
number lists. Unknown keys are errors. Overrides use the same value
grammar as `section.key=value`.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Callable, Iterable

from vssea.core.observer import ObserverSettings
from vssea.core.plant import PlantParams, to_gear_side
from vssea.core.synthesis import (
    CONTROLLER_KINDS,
    ControllerConfig,
    LqrSettings,
    PolePlacementSettings,
    SmcSettings,
    StiffnessSettings,
)
from vssea.core.validation import ValidationError, validate_scenario
from vssea.sim.disturbance import CHANNELS, DisturbanceProfile
from vssea.sim.reference import REFERENCE_KINDS, ReferenceTrajectory
from vssea.sim.scenario import ScenarioConfig, SimSettings

SECTIONS = ("plant", "controller", "observer", "reference", "disturbance", "sim")


class ConfigError(ValidationError):
    """Malformed file, unknown key or invalid value, with line/key diagnostics."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, key)


# -- Value grammar --


def _unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def _float(text: str) -> float:
    return float(_unquote(text))


def _int(text: str) -> int:
    return int(_unquote(text))


def _bool(text: str) -> bool:
    word = _unquote(text).lower()
    if word in ("true", "yes", "on"):
        return True
    if word in ("false", "no", "off"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _enum(*choices: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        word = _unquote(text)
        if word not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}, got {word!r}")
        return word
    return parse


def _floats(n: int) -> Callable[[str], tuple[float, ...]]:
    def parse(text: str) -> tuple[float, ...]:
        items = [float(s) for s in _unquote(text).split(",")]
        if len(items) != n:
            raise ValueError(f"expected {n} comma-separated numbers, got {len(items)}")
        return tuple(items)
    return parse


def _poles(text: str) -> tuple[complex, ...]:
    items = [complex(s.strip().replace(" ", "")) for s in _unquote(text).split(",")]
    if len(items) != 4:
        raise ValueError(f"expected 4 poles, got {len(items)}")
    return tuple(items)


def _optional_float(text: str) -> float | None:
    return None if _unquote(text).lower() == "auto" else _float(text)


_PLANT_FLOATS = ("j_l", "b_l", "j_e", "b_e", "k", "j_ms", "b_ms", "upsilon_tau", "upsilon_k", "theta_ms_min")

KEYS: dict[str, Callable[[str], Any]] = {
    **{f"plant.{name}": _float for name in _PLANT_FLOATS},
    "plant.n": _float,
    "plant.spring_consistent": _bool,
    "plant.spring": _enum("linear", "nonlinear"),
    "plant.side": _enum("gear", "motor"),
    "controller.kind": _enum(*CONTROLLER_KINDS),
    "controller.poles": _poles,
    "controller.lqr_q": _floats(4),
    "controller.lqr_r": _float,
    "controller.smc_s1": _float,
    "controller.smc_s2": _float,
    "controller.smc_s3": _float,
    "controller.smc_rho": _float,
    "controller.smc_epsilon": _float,
    "controller.stiffness_kp": _float,
    "controller.stiffness_kd": _float,
    "controller.stiffness_dob_bandwidth": _float,
    "controller.stiffness_dob": _bool,
    "controller.torque_limit": _float,
    "observer.bandwidth": _float,
    "observer.g0": _optional_float,
    "observer.g1": _optional_float,
    "observer.g2": _optional_float,
    "observer.projection": _bool,
    "observer.mode": _enum("estimate", "truth"),
    "observer.noise_std": _float,
    "reference.kind": _enum(*REFERENCE_KINDS),
    "reference.amplitude": _float,
    "reference.start_s": _float,
    "reference.frequency": _float,
    "reference.duration_s": _float,
    "reference.stiffness_position": _float,
    **{
        f"disturbance.{ch}_{part}": _float
        for ch in CHANNELS
        for part in ("bias", "amplitude", "frequency")
    },
    "disturbance.t_on": _float,
    "disturbance.t_off": _float,
    "sim.step_s": _float,
    "sim.duration_s": _float,
    "sim.decimation": _int,
    "sim.zero_order_hold": _bool,
    "sim.theta_l0": _float,
    "sim.dtheta_l0": _float,
    "sim.theta_e0": _float,
    "sim.dtheta_e0": _float,
    "sim.seed": _int,
}


@dataclass(frozen=True)
class Entry:
    """One raw assignment; `line` is None for command-line overrides."""

    text: str
    line: int | None = None


def coerce(key: str, entry: Entry) -> Any:
    parse = KEYS.get(key)
    if parse is None:
        raise ConfigError(f"unknown key {key!r}", key, entry.line)
    try:
        return parse(entry.text)
    except ValueError as e:
        raise ConfigError(f"bad value {entry.text.strip()!r}: {e}", key, entry.line) from None


# -- Text to key map --


def read_entries(text: str) -> dict[str, Entry]:
    """Parse file text into {section.key: Entry} without interpreting values."""
    entries: dict[str, Entry] = {}
    section: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", line=lineno)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", section, lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}", line=lineno)
        if section is None:
            raise ConfigError("key outside of any section", line=lineno)
        name, value = (s.strip() for s in line.split("=", 1))
        key = f"{section}.{name}"
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", key, lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first on line {entries[key].line})", key, lineno)
        if not value:
            raise ConfigError("missing value", key, lineno)
        entries[key] = Entry(value, lineno)
    return entries


def parse_override(spec: str) -> tuple[str, Entry]:
    """'section.key=value' -> (key, Entry)."""
    if "=" not in spec:
        raise ConfigError(f"override must look like section.key=value, got {spec!r}")
    key, value = (s.strip() for s in spec.split("=", 1))
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}", key)
    return key, Entry(value)


def apply_overrides(entries: dict[str, Entry], overrides: Iterable[str]) -> dict[str, Entry]:
    """Later overrides of the same key win; distinct keys commute."""
    merged = dict(entries)
    for spec in overrides:
        key, entry = parse_override(spec)
        merged[key] = entry
    return merged


# -- Key map to ScenarioConfig --


def _section(values: dict[str, Any], name: str) -> dict[str, Any]:
    prefix = name + "."
    return {k[len(prefix):]: v for k, v in values.items() if k.startswith(prefix)}


def _plant(v: dict[str, Any]) -> PlantParams:
    side = v.pop("side", "gear")
    if "n" in v:
        v["gear_ratio"] = v.pop("n")
    params = replace(PlantParams(), **v)
    if side == "motor":
        j_e, b_e = to_gear_side(params.j_e, params.b_e, params.gear_ratio)
        params = replace(params, j_e=j_e, b_e=b_e)
    return params


def _controller(v: dict[str, Any]) -> ControllerConfig:
    base = ControllerConfig()
    smc = base.smc
    s = list(smc.s)
    for i in range(3):
        s[i] = v.get(f"smc_s{i + 1}", s[i])
    stiff = base.stiffness
    return ControllerConfig(
        kind=v.get("kind", base.kind),
        pole_placement=PolePlacementSettings(v.get("poles", base.pole_placement.poles)),
        lqr=LqrSettings(v.get("lqr_q", base.lqr.q), v.get("lqr_r", base.lqr.r)),
        smc=SmcSettings(tuple(s), v.get("smc_rho", smc.rho), v.get("smc_epsilon", smc.epsilon)),
        stiffness=StiffnessSettings(
            v.get("stiffness_kp", stiff.kp),
            v.get("stiffness_kd", stiff.kd),
            v.get("stiffness_dob_bandwidth", stiff.dob_bandwidth),
            v.get("stiffness_dob", stiff.dob),
        ),
        torque_limit=v.get("torque_limit", base.torque_limit),
    )


def _reference(v: dict[str, Any]) -> ReferenceTrajectory:
    renames = {"start_s": "start", "duration_s": "duration"}
    return replace(ReferenceTrajectory(), **{renames.get(k, k): x for k, x in v.items()})


def _disturbance(v: dict[str, Any]) -> DisturbanceProfile:
    profile = DisturbanceProfile()
    channels = {}
    for ch in CHANNELS:
        parts = {part: v[f"{ch}_{part}"] for part in ("bias", "amplitude", "frequency") if f"{ch}_{part}" in v}
        channels[ch] = replace(getattr(profile, ch), **parts) if parts else getattr(profile, ch)
    return replace(
        profile,
        **channels,
        t_on=v.get("t_on", profile.t_on),
        t_off=v.get("t_off", profile.t_off),
    )


def build_config(entries: dict[str, Entry]) -> ScenarioConfig:
    """Coerce every entry, fill defaults and validate the result."""
    values = {key: coerce(key, entry) for key, entry in entries.items()}
    try:
        config = ScenarioConfig(
            plant=_plant(_section(values, "plant")),
            controller=_controller(_section(values, "controller")),
            observer=replace(ObserverSettings(), **_section(values, "observer")),
            reference=_reference(_section(values, "reference")),
            disturbance=_disturbance(_section(values, "disturbance")),
            sim=replace(SimSettings(), **_section(values, "sim")),
        )
        validate_scenario(config)
    except ConfigError:
        raise
    except ValidationError as e:
        line = entries[e.key].line if e.key in entries else None
        raise ConfigError(e.detail, e.key, line) from None
    return config


def parse_config(text: str, overrides: Iterable[str] = ()) -> ScenarioConfig:
    """Full pipeline: text -> entries -> overrides -> validated ScenarioConfig."""
    return build_config(apply_overrides(read_entries(text), overrides))


def load_config(path: str | None, overrides: Iterable[str] = ()) -> ScenarioConfig:
    if path is None:
        return parse_config("", overrides)
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return parse_config(text, overrides)

