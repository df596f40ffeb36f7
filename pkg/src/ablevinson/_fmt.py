"""Text output with 17 significant digits, so every double round-trips."""

from __future__ import annotations

import json
import math

import numpy as np


def fmt17(value: float) -> str:
    """A float as text with 17 significant digits; non-finite values become 'nan'/'inf'."""
    value = float(value)
    if not math.isfinite(value):
        return repr(value)
    text = format(value, ".17g")
    return text if any(c in text for c in ".e") else text + ".0"


def dumps17(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON for nested dicts and lists; floats use :func:`fmt17`, non-finite become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return json.dumps(obj if not isinstance(obj, np.bool_) else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt17(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps17(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + dumps17(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")
