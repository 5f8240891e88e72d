"""Deterministic serialization helpers.

Reports and tables are written with every float at 17 significant
digits, which round-trips IEEE doubles losslessly and keeps repeated
runs byte-identical.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["format_float", "dumps_json"]


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError("JSON reports must be finite")
        return format_float(x)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f'{_encode(str(k))}: {_encode(v)}' for k, v in items) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps_json(obj) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats."""
    return _encode(obj) + "\n"
