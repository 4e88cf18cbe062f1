"""Canonical JSON encoding for report documents.

Floats are printed with 17 significant digits so that re-parsing reproduces
the exact double; exact rationals become {"num": "...", "den": "..."} with
decimal strings, complex numbers {"re": ..., "im": ...}. Output is fully
deterministic: dict keys keep insertion order, no whitespace variation.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from .exceptions import ValidationError


def format_float(x: float) -> str:
    """Round-trip-safe decimal for a double; non-finite values are quoted."""
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(float(x), ".17g")


def _encode(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, Fraction):
        out.append('{"num": "%d", "den": "%d"}' % (obj.numerator, obj.denominator))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        out.append('{"re": %s, "im": %s}' % (format_float(z.real), format_float(z.imag)))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise ValidationError(f"document keys must be strings, got {k!r}")
            if i:
                out.append(", ")
            out.append(json.dumps(k, ensure_ascii=False))
            out.append(": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    elif isinstance(obj, np.ndarray):
        _encode(obj.tolist(), out)
    else:
        raise ValidationError(f"cannot serialize object of type {type(obj).__name__}")


def dumps(obj) -> str:
    out: list = []
    _encode(obj, out)
    return "".join(out)


def parse_exact(node) -> Fraction:
    """Exact rational from an int, a "p/q" string, or a {"num","den"} object.

    Floats are refused: exact pipelines must never receive rounded input.
    """
    if isinstance(node, bool):
        raise ValidationError("expected an exact rational, got a boolean")
    if isinstance(node, int):
        return Fraction(node)
    if isinstance(node, float):
        raise ValidationError(
            f"expected an exact rational, got float {node!r}; write it as a "
            'string "p/q" or {"num": ..., "den": ...}')
    if isinstance(node, str):
        try:
            return Fraction(node)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse rational from {node!r}: {exc}") from None
    if isinstance(node, dict):
        extra = set(node) - {"num", "den"}
        if extra:
            raise ValidationError(f"unknown keys in rational object: {sorted(extra)}")
        if "num" not in node or "den" not in node:
            raise ValidationError('rational object needs both "num" and "den"')
        try:
            num = int(str(node["num"]))
            den = int(str(node["den"]))
            return Fraction(num, den)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"bad rational object {node!r}: {exc}") from None
    raise ValidationError(f"cannot interpret {node!r} as an exact rational")
