"""JSON encoding of coefficient values and matrices, plus canonical dumping."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Optional, Sequence

from .ringcore import GaussianRational, Series, SeriesRing
from .ringcore.scalars import parse_rational, scalar_from_json, scalar_to_json


def value_to_json(v: Any) -> Any:
    """Rationals as strings, Gaussian rationals as re/im, series as term lists.

    Series omit their ring, which the enclosing object declares once.
    """
    if isinstance(v, Series):
        if v.is_constant():
            return scalar_to_json(v.constant_term())
        return {"terms": v.to_json()["terms"]}
    if isinstance(v, int) and not isinstance(v, bool):
        v = Fraction(v)
    return scalar_to_json(v)


def value_from_json(data: Any, ring: Optional[SeriesRing] = None) -> Any:
    if isinstance(data, dict) and "terms" in data:
        if ring is None:
            raise ValueError("series value given but no ring declared")
        return Series.from_json(data, ring)
    v = scalar_from_json(data)
    if ring is not None and isinstance(v, Fraction):
        return ring.const(v)
    return v


def matrix_to_json(m: Sequence[Sequence]) -> list:
    return [[value_to_json(x) for x in row] for row in m]


def matrix_from_json(data: Any) -> list:
    if not isinstance(data, list) or any(not isinstance(r, list) for r in data):
        raise ValueError("matrix must be a list of rows")
    rows = [[scalar_from_json(x) for x in row] for row in data]
    if rows and any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("ragged matrix")
    return rows


def vector_from_json(data: Any) -> tuple:
    if not isinstance(data, list):
        raise ValueError("vector must be a list")
    return tuple(parse_rational(x) for x in data)


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
