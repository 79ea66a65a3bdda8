"""CSV writers: LF line endings, '.' decimal point, 17 significant digits."""
from __future__ import annotations

import csv
import io
from typing import Sequence, TextIO

from vssea.core.config import TRACE_COLUMNS
from vssea.core.serialization import format_float
from vssea.sim.metrics import METRIC_FIELDS
from vssea.sim.scenario import SimTrace
from vssea.sim.sweep import SweepRow

TRUNCATION_MARKER = "# truncated"
UNSETTLED = "unsettled"


def _writer(f: TextIO):
    return csv.writer(f, lineterminator="\n")


def write_trace(f: TextIO, trace: SimTrace, failed_step: int | None = None) -> None:
    w = _writer(f)
    w.writerow(TRACE_COLUMNS)
    for row in trace.rows:
        w.writerow([format_float(v) for v in row])
    if trace.truncated:
        where = f" at step {failed_step}" if failed_step is not None else ""
        f.write(f"{TRUNCATION_MARKER}{where}: {trace.diagnostic}\n")


def trace_to_text(trace: SimTrace, failed_step: int | None = None) -> str:
    buf = io.StringIO()
    write_trace(buf, trace, failed_step)
    return buf.getvalue()


def save_trace(path: str, trace: SimTrace, failed_step: int | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_trace(f, trace, failed_step)


def _metric_cell(value: float | None) -> str:
    return UNSETTLED if value is None else format_float(value)


def write_sweep(f: TextIO, key: str, rows: Sequence[SweepRow]) -> None:
    w = _writer(f)
    w.writerow([key, *METRIC_FIELDS, "error"])
    for row in rows:
        if row.metrics is None:
            cells = [""] * len(METRIC_FIELDS)
        else:
            m = row.metrics.to_dict()
            cells = [_metric_cell(m[name]) for name in METRIC_FIELDS]
        w.writerow([row.value, *cells, row.error])


def save_sweep(path: str, key: str, rows: Sequence[SweepRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        write_sweep(f, key, rows)
