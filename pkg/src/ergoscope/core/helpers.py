"""Helper functions shared by the numeric modules and the reporters."""

import json
import math
from fractions import Fraction
from numbers import Rational
from typing import Any, Iterable, List, Sequence, Union

import numpy as np

Number = Union[int, Fraction, float]


def frac_to_str(value: Fraction) -> str:
    """Render a rational as ``"num/den"`` (the wire format for exact values)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(value: Any) -> Fraction:
    """
    Parse a rational from the formats accepted in configs and bundles.

    Args:
        value: ``Fraction``, int, ``"num/den"`` / decimal string, or float

    Returns:
        The exact rational. Floats go through their shortest repr, so
        ``0.1`` becomes ``1/10`` rather than the binary expansion.

    Raises:
        ValueError: If the value cannot be read as a rational
    """
    if isinstance(value, bool):
        raise ValueError(f"Not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"Not a finite number: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"Not a rational: {value!r}")


def is_exact(value: Any) -> bool:
    """True for ints and Fractions (but not bools or floats)."""
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def jsonable(obj: Any) -> Any:
    """
    Convert nested results into JSON-ready values.

    Fractions become ``"num/den"`` strings, numpy scalars and arrays become
    Python numbers and lists, objects with ``to_dict`` are expanded.
    """
    if hasattr(obj, "to_dict") and callable(obj.to_dict):
        return jsonable(obj.to_dict())
    if isinstance(obj, Fraction):
        return frac_to_str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, np.generic):
        return jsonable(obj.item())
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    return str(obj)


def stable_json_dumps(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, fixed indent, trailing newline)."""
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def pairs_to_json(intervals: Iterable[Sequence[Number]]) -> List[List[Any]]:
    """Serialize ``(lo, hi)`` pairs as ``[lo, hi]`` lists."""
    return [[jsonable(lo), jsonable(hi)] for lo, hi in intervals]


def matrix_to_json(matrix: Sequence[Sequence[int]]) -> List[List[int]]:
    """Row-major integer array."""
    return [[int(x) for x in row] for row in matrix]
