"""Canonical config bytes, config digests and the CSV float format.

Two configs that compare equal field by field canonicalize to the same
bytes, so their digests match across runs and machines.
"""
import hashlib
import json
import math
from typing import Any, Mapping

from vssea.core.config import CSV_FLOAT_DIGITS


def _to_json(obj: Any) -> Any:
    # complex poles travel as [re, im]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "tolist"):  # numpy arrays and scalars
        return obj.tolist()
    raise TypeError(f"cannot canonicalize {type(obj).__name__}")


def canonicalize(data: Mapping[str, Any]) -> bytes:
    """Compact sorted-key JSON; NaN and infinities are rejected."""
    text = json.dumps(
        dict(data),
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
        default=_to_json,
    )
    return text.encode("utf-8")


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def compute_hash(data: Mapping[str, Any]) -> bytes:
    return sha256(canonicalize(data))


def config_digest(data: Mapping[str, Any], length: int = 12) -> str:
    """Short hex digest identifying a configuration in logs and summaries."""
    return compute_hash(data).hex()[:length]


def format_float(value: float) -> str:
    """17 significant digits, '.' decimal point, independent of locale."""
    value = float(value)
    if not math.isfinite(value):
        return repr(value)
    if value == 0.0:
        # drop the sign of negative zero so reruns diff cleanly
        return "0"
    return f"{value:.{CSV_FLOAT_DIGITS}g}"
