"""Deterministic JSON encoding for jobs and reports.

All numbers are emitted as decimal strings (17 significant digits for floats,
exact p/q for rationals) so reruns with equal config and seed produce
byte-identical reports across platforms that agree on the arithmetic.
"""

from __future__ import annotations

import json
from fractions import Fraction
from numbers import Integral, Rational
from typing import Any

import numpy as np

from .scalars import GaussianRational


def format_float(x: float) -> str:
    if x != x:
        return "nan"
    return f"{float(x):.17g}"


def encode_number(value) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, Integral):
        return str(int(value))
    if isinstance(value, Fraction) or isinstance(value, Rational):
        f = Fraction(value)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
    if isinstance(value, GaussianRational):
        return {"re": encode_number(value.re), "im": encode_number(value.im)}
    if isinstance(value, complex) or isinstance(value, np.complexfloating):
        c = complex(value)
        if c.imag == 0.0:
            return format_float(c.real)
        return {"re": format_float(c.real), "im": format_float(c.imag)}
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    return value


def encode(obj) -> Any:
    """Recursively convert numbers to deterministic strings."""
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [encode(v) for v in obj.tolist()]
    return encode_number(obj)


def dumps(obj) -> str:
    return json.dumps(encode(obj), indent=2, sort_keys=False, ensure_ascii=True) + "\n"


def parse_exact(text) -> Fraction:
    """Parse a JSON number or 'p/q' string into an exact rational."""
    if isinstance(text, bool):
        raise ValueError("boolean is not a number")
    if isinstance(text, Integral):
        return Fraction(int(text))
    if isinstance(text, float):
        return Fraction(text).limit_denominator(10 ** 12)
    if isinstance(text, str):
        return Fraction(text)
    raise ValueError(f"cannot parse {text!r} as an exact number")


def parse_scalar(value, gaussian: bool):
    """Exact scalar from JSON: number, 'p/q' string, or {re, im} object."""
    if isinstance(value, dict):
        re = parse_exact(value.get("re", 0))
        im = parse_exact(value.get("im", 0))
        if im != 0 and not gaussian:
            raise ValueError("imaginary part given for a real-field job")
        if gaussian:
            return GaussianRational(re, im)
        return re
    exact = parse_exact(value)
    return GaussianRational(exact, Fraction(0)) if gaussian else exact
