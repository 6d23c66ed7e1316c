"""JSON encoding of scalars, matrices, norms and points.

Exact rationals are strings ``"num/den"``; floats are JSON numbers (infinity
is the string ``"inf"``); complex numbers are ``[re, im]``; elements of
F_p(T) are ``{"num": [...], "den": [...]}`` with ascending coefficients.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from . import linalg as la
from .decomp import ChartPoint, IwasawaTriple
from .errors import MalformedInputError
from .norms import Norm, SemiNorm
from .points import BoundaryPoint, FlatPoint, SharpPoint, flag_ring_one
from .scalars import Place, RatFunc, decode_scalar, encode_scalar


def encode(obj):
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, int):
        return obj
    if isinstance(obj, (float, complex, Fraction, RatFunc)):
        return encode_scalar(obj)
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(encode(x) for x in obj)
    if isinstance(obj, (list, tuple)):
        return [encode(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, Place):
        return str(obj)
    if isinstance(obj, SemiNorm):
        return {"basis": encode(obj.basis), "weights": encode(obj.weights)}
    if isinstance(obj, la.Subspace):
        return {"d": obj.d, "basis": encode(obj.basis)}
    if isinstance(obj, la.Flag):
        return {"d": obj.d, "steps": [encode(W.basis) for W in obj.steps]}
    if isinstance(obj, BoundaryPoint):
        return {"place": str(obj.place), "flag": encode(obj.flag),
                "graded": [encode(m) for m in obj.graded]}
    if isinstance(obj, FlatPoint):
        return {"place": str(obj.place), "W": encode(obj.W), "class": encode(obj.cls)}
    if isinstance(obj, SharpPoint):
        return {"point": encode(obj.point), "splitting": encode(obj.splitting)}
    if isinstance(obj, ChartPoint):
        return {"g": encode(obj.g), "t": encode(obj.t)}
    if isinstance(obj, IwasawaTriple):
        return {"u": encode(obj.u), "a": encode(obj.a), "k": encode(obj.k),
                "t": encode(obj.t)}
    if hasattr(obj, "to_dict"):
        return encode(obj.to_dict())
    raise MalformedInputError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(encode(obj), sort_keys=True, separators=(",", ":"))


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"invalid JSON: {exc}") from exc


# --- decoding ------------------------------------------------------------------------

def _need(obj, key):
    if not isinstance(obj, dict) or key not in obj:
        raise MalformedInputError(f"missing field {key!r}")
    return obj[key]


def decode_vector(obj, v: Place):
    if not isinstance(obj, list):
        raise MalformedInputError("vector must be a JSON list")
    return tuple(decode_scalar(x, v) for x in obj)


def decode_matrix(obj, v: Place):
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise MalformedInputError("matrix must be a non-empty list of rows")
    n = len(obj[0])
    if any(len(r) != n for r in obj):
        raise MalformedInputError("matrix rows of unequal length")
    return tuple(decode_vector(r, v) for r in obj)


def decode_weight(x):
    if isinstance(x, bool):
        raise MalformedInputError("bad weight")
    if isinstance(x, str):
        if x == "inf":
            return math.inf
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedInputError(f"bad weight {x!r}") from exc
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    raise MalformedInputError(f"bad weight {x!r}")


def decode_rational_matrix(obj):
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise MalformedInputError("matrix must be a list of rows")
    out = []
    for r in obj:
        row = []
        for x in r:
            if isinstance(x, bool):
                raise MalformedInputError("bad matrix entry")
            if isinstance(x, float):
                row.append(x)
            else:
                row.append(decode_weight(x))
        out.append(tuple(row))
    return tuple(out)


def decode_norm(obj, v: Place, semi: bool = False) -> SemiNorm:
    """{"basis": M, "weights": r}, {"weights": r} (standard basis) or, at an
    archimedean place, {"gram": G}."""
    if isinstance(obj, dict) and "gram" in obj:
        from .reduction import norm_from_gram
        return norm_from_gram(decode_rational_matrix(obj["gram"]), v)
    weights = _need(obj, "weights")
    if not isinstance(weights, list):
        raise MalformedInputError("weights must be a list")
    weights = tuple(decode_weight(x) for x in weights)
    if "basis" in obj:
        basis = decode_matrix(obj["basis"], v)
    else:
        basis = la.identity(len(weights), v.one())
    cls = SemiNorm if semi else Norm
    return cls(v, basis, weights)


def decode_flag_scalar(x, v: Place):
    if v.kind == "laurent":
        return decode_scalar(x, v)
    if isinstance(x, (bool, float)):
        raise MalformedInputError("flag entries must be rational")
    return decode_weight(x)


def decode_flag(obj, d: int, v: Place) -> la.Flag:
    """{"type": [dims]} for the standard flag, or {"steps": [[basis rows], ...]}."""
    if isinstance(obj, list):
        obj = {"type": obj}
    if "type" in obj:
        return la.Flag.standard(obj["type"], d, flag_ring_one(v))
    steps = []
    for rows in _need(obj, "steps"):
        vecs = [tuple(decode_flag_scalar(x, v) for x in r) for r in rows]
        steps.append(la.Subspace.span(vecs, d))
    return la.Flag(d, tuple(steps))


def decode_boundary_point(obj, v: Place) -> BoundaryPoint:
    if isinstance(obj, dict) and "graded" not in obj:
        return BoundaryPoint.interior(decode_norm(obj, v))
    graded = tuple(decode_norm(m, v) for m in _need(obj, "graded"))
    d = sum(m.d for m in graded)
    flag = decode_flag(obj.get("flag", {"type": []}), d, v)
    return BoundaryPoint(v, flag, graded)


def decode_chart_point(obj, v: Place) -> ChartPoint:
    g = decode_matrix(_need(obj, "g"), v)
    t = tuple(decode_weight(x) for x in _need(obj, "t"))
    if v.is_archimedean:
        t = tuple(float(x) for x in t)
    return ChartPoint(g, t)
