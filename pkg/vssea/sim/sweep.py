"""One-key parameter sweeps over a base scenario."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from vssea.core.numkit import SynthesisError
from vssea.core.validation import ValidationError
from vssea.io.configfile import KEYS, ConfigError, parse_config
from vssea.sim.metrics import Metrics, compute_metrics
from vssea.sim.scenario import SimulationDivergence, run_scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepSpec:
    key: str
    values: tuple[str, ...]

    @classmethod
    def parse(cls, text: str) -> SweepSpec:
        """'section.key=v1,v2,...'. Values containing commas (pole lists) use ';'."""
        if "=" not in text:
            raise ConfigError(f"sweep must look like section.key=v1,v2,..., got {text!r}")
        key, raw = (s.strip() for s in text.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown sweep key {key!r}", key)
        sep = ";" if ";" in raw else ","
        values = tuple(v.strip() for v in raw.split(sep) if v.strip())
        if not values:
            raise ConfigError("sweep value list is empty", key)
        return cls(key, values)


@dataclass(frozen=True)
class SweepRow:
    value: str
    metrics: Metrics | None = None
    error: str = ""


def run_row(text: str, overrides: Sequence[str], key: str, value: str) -> SweepRow:
    """Run one sweep point; every expected failure lands in the error column."""
    try:
        config = parse_config(text, [*overrides, f"{key}={value}"])
        return SweepRow(value, compute_metrics(run_scenario(config)))
    except (ValidationError, SynthesisError, SimulationDivergence) as e:
        logger.warning(f"sweep {key}={value} failed: {e}")
        return SweepRow(value, error=f"{type(e).__name__}: {e}")


def run_sweep(text: str, overrides: Sequence[str], spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """Rows come back in the order of `spec.values`, whatever order they finish in."""
    n = len(spec.values)
    args = ([text] * n, [list(overrides)] * n, [spec.key] * n, list(spec.values))
    if jobs <= 1 or n == 1:
        return [run_row(*a) for a in zip(*args)]
    logger.info(f"sweeping {spec.key} over {n} values with {jobs} workers")
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_row, *args))
