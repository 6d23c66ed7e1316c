"""Finite-schedule convergence oracles and the topology-separating examples.

A verdict is a semi-decision: a sequence is declared convergent when its
distance to the target has settled below ``tol`` and did not grow over the
last ``TAIL`` terms of the schedule. Every verdict carries its schedule.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import linalg as la
from .boundary import phi_P, phi_prime_P
from .boundary import sharp_chart_point
from .decomp import ChartPoint, chart_fiber_eq, chart_images_equal, is_unipotent_upper
from .errors import PreconditionError, UnsupportedPlaceError
from .norms import Norm, SemiNorm, class_distance, class_eq, dual, restrict
from .points import BoundaryPoint, flag_ring_one
from .scalars import Place, normalized_abs

TAIL = 10
DEFAULT_LENGTH = 48
# float Gram matrices lose x^2 + 1 against x^2 past 2^26
ARCH_LENGTH = 24


@dataclass
class SeqSpec:
    """A family of interior classes evaluated along a parameter schedule."""
    name: str
    family: Callable[[object], Norm]
    schedule: tuple

    def __post_init__(self):
        self.schedule = tuple(self.schedule)
        if not self.schedule:
            raise PreconditionError("empty schedule")

    def terms(self):
        return [self.family(s) for s in self.schedule]

    @classmethod
    def from_table(cls, name: str, norms: Sequence[Norm]) -> "SeqSpec":
        norms = tuple(norms)
        return cls(name, lambda n: norms[n], tuple(range(len(norms))))


@dataclass
class Verdict:
    converges: bool
    limit_kind: str
    diagnostics: dict = field(default_factory=dict)
    schedule: tuple = ()

    def to_dict(self):
        return {"converges": self.converges, "limitKind": self.limit_kind,
                "diagnostics": self.diagnostics, "schedule": list(self.schedule)}


def geometric_schedule(base, n: int | None = None, start: int = 0) -> tuple:
    base = Fraction(base) if isinstance(base, (int, Fraction)) else base
    return tuple(base ** k for k in range(start, start + n))


def element_of_abs(s, v: Place):
    """An element whose normalized absolute value is s (archimedean: s itself)."""
    if v.is_archimedean:
        return v.coerce(float(s))
    s = Fraction(s)
    if s == 0:
        return v.zero()
    q = v.q
    k = round(math.log(s) / math.log(q))
    if Fraction(q) ** k != s:
        raise PreconditionError(f"{s} is not a power of {q}")
    return v.uniformizer() ** (-k)


def _settled(errors, tol) -> bool:
    tail = errors[-TAIL:]
    monotone = all(float(b) <= float(a) + tol for a, b in zip(tail, tail[1:]))
    return monotone and float(tail[-1]) <= tol


# --- weak topology ----------------------------------------------------------------

def default_probes(d: int, v: Place) -> list:
    one, zero = v.one(), v.zero()
    out = []
    for bits in itertools.product((0, 1), repeat=d):
        if any(bits):
            out.append(tuple(one if b else zero for b in bits))
    out.sort(key=lambda p: (sum(1 for x in p if x != 0), [x == 0 for x in p]))
    return out


def weak_limit_check(seq: SeqSpec, target: SemiNorm, probes=None,
                     tol: float = 1e-9) -> Verdict:
    """Pointwise convergence of dual norms on probe vectors of V*, after
    rescaling everything to 1 at the first probe where the target is nonzero."""
    v = target.place
    probes = list(probes) if probes is not None else default_probes(target.d, v)
    anchor = next((p for p in probes if target(p) != 0), None)
    if anchor is None:
        raise PreconditionError("target semi-norm vanishes on every probe")
    tvals = [target(p) / target(anchor) for p in probes]
    errors, traces = [], []
    for mu in seq.terms():
        nu = dual(mu)
        a = nu(anchor)
        vals = [nu(p) / a for p in probes]
        errors.append(max(abs(x - y) for x, y in zip(vals, tvals)))
        traces.append([float(x) for x in vals])
    full = all(target(p) != 0 for p in probes)
    return Verdict(_settled(errors, tol), "interior" if full else "flat-boundary",
                   {"error": [float(e) for e in errors], "probe_values": traces,
                    "target_values": [float(x) for x in tvals]},
                   seq.schedule)


# --- Satake topology --------------------------------------------------------------

def satake_limit_check(seq: SeqSpec, target: BoundaryPoint, tol: float = 1e-9) -> Verdict:
    """phi_P of the terms must approach the target's graded classes and the
    t-vector relative to P must approach 0."""
    P = target.flag
    dist, tmax = [], []
    for mu in seq.terms():
        bp = BoundaryPoint.interior(mu)
        pieces = phi_P(bp, P)
        dist.append(max(class_distance(a, b) for a, b in zip(pieces, target.graded)))
        t = phi_prime_P(bp, P)
        tmax.append(max(t) if t else 0.0)
    errors = [max(a, b) for a, b in zip(dist, tmax)]
    kind = "interior" if target.is_interior else "full-boundary"
    return Verdict(_settled(errors, tol), kind,
                   {"graded_distance": dist, "t_max": [float(x) for x in tmax]},
                   seq.schedule)


# --- registered families --------------------------------------------------------

def mu_yx(y, x, v: Place) -> Norm:
    """a e1 + b e2 -> max(|a - x b|, y |b|)."""
    one, zero = v.one(), v.zero()
    return Norm(v, ((one, v.coerce(x)), (zero, one)), (1, y))


def mu_y_gx(y, x, v: Place) -> Norm:
    """a e1 + b e2 + c e3 -> max(|a|, y|b|, y^2|c|) precomposed with e3 -> x e2 + e3."""
    one, zero = v.one(), v.zero()
    gx_inv = ((one, zero, zero), (zero, one, -v.coerce(x)), (zero, zero, one))
    return Norm(v, gx_inv, (1, y, y * y))


def mu_x_eps(x, eps, v: Place) -> Norm:
    """a e1 + b e2 + c e3 -> max(|a|, |b|, |c + b x| / eps)."""
    one, zero = v.one(), v.zero()
    basis = ((one, zero, zero), (zero, one, zero), (zero, -v.coerce(x), one))
    return Norm(v, basis, (1, 1, 1 / eps))


def coordinate_seminorm(v: Place, d: int, support) -> SemiNorm:
    """The semi-norm on V* picking out the dual coordinates listed in support (1-based)."""
    return SemiNorm.standard(v, d, tuple(1 if i + 1 in support else 0 for i in range(d)))


def standard_boundary_point(v: Place, d: int, steps) -> BoundaryPoint:
    flag = la.Flag.standard(steps, d, flag_ring_one(v))
    return BoundaryPoint(v, flag, tuple(Norm.standard(v, k) for k in flag.graded_dims()))


def _default_place():
    return Place.padic(2)


def _base(v: Place):
    return Fraction(v.q) if not v.is_archimedean else 2


def _require_nonarch(v: Place):
    if v.is_archimedean:
        raise UnsupportedPlaceError("this example is set at a non-archimedean place")


def _length(v: Place, n):
    if n is not None:
        return n
    return ARCH_LENGTH if v.is_archimedean else DEFAULT_LENGTH


def example_bssa(v: Place | None = None, n: int | None = None) -> dict:
    """The set {t < |x|^-1} contains no basic Satake neighborhood {t <= c} of the
    point at infinity, while a sequence with t -> 0 stays outside it."""
    v = v or _default_place()
    q = _base(v)
    n = n or DEFAULT_LENGTH
    cs = geometric_schedule(1 / q if isinstance(q, Fraction) else 0.5, n)
    witnesses = []
    for c in cs:
        t = c / 2
        xabs = 2 * q / c if v.is_archimedean else _next_power(2 / c, q)
        x = element_of_abs(xabs, v)
        in_uc = t <= c
        in_bs = t < 1 / normalized_abs(x, v)
        witnesses.append({"c": float(c), "t": float(t), "abs_x": float(xabs),
                          "in_satake_basic_set": in_uc, "in_bs_set": in_bs})
    contains_some_uc = not all(w["in_satake_basic_set"] and not w["in_bs_set"]
                               for w in witnesses)
    # a sequence (x_n, t_n) with t_n -> 0 that never enters the BS set
    seq = []
    for k in range(n):
        tk = q ** (-k) if isinstance(q, Fraction) else 2.0 ** (-k)
        xk = element_of_abs(q ** (2 * k) if isinstance(q, Fraction) else 4.0 ** k, v)
        seq.append({"t": float(tk), "in_bs_set": tk < 1 / normalized_abs(xk, v)})
    seq_to_zero = seq[-1]["t"] <= 1e-9
    return {"name": "bssa", "place": str(v),
            "bs_set_is_satake_neighborhood": contains_some_uc,
            "witness_sequence_satake_converges": seq_to_zero,
            "witness_sequence_enters_bs_set": any(s["in_bs_set"] for s in seq),
            "witnesses": witnesses}


def _next_power(s, q):
    k = max(0, math.ceil(math.log(float(s)) / math.log(float(q))))
    while Fraction(q) ** k < s:
        k += 1
    return Fraction(q) ** k * q


def example_bssb(v: Place | None = None, n: int | None = None, x_bounded=None,
                 tol: float = 1e-9) -> dict:
    """Family A: y -> infinity with x fixed. Family B: y = 1 with |x| -> infinity."""
    v = v or _default_place()
    q = _base(v)
    ys = geometric_schedule(q, _length(v, n))
    xb = v.one() if x_bounded is None else v.coerce(x_bounded)
    alpha = standard_boundary_point(v, 2, (1,))
    nu = coordinate_seminorm(v, 2, {1})
    famA = SeqSpec("mu_{y,x}, y->inf", lambda y: mu_yx(y, xb, v), ys)
    famB = SeqSpec("mu_{1,x}, |x|->inf", lambda s: mu_yx(1, element_of_abs(s, v), v), ys)
    out = {"name": "bssb", "place": str(v), "families": {}}
    for key, fam in (("y_to_infinity", famA), ("x_to_infinity", famB)):
        w = weak_limit_check(fam, nu, tol=tol)
        s = satake_limit_check(fam, alpha, tol=tol)
        out["families"][key] = {"weak": w.converges, "satake": s.converges,
                                "weak_error": w.diagnostics["error"][-1],
                                "satake_t": s.diagnostics["t_max"][-1]}
    return out


def example_d3_weak(y_schedule=None, x_abs_schedule=None, v: Place | None = None,
                    tol: float = 1e-9) -> dict:
    """mu_y o g_x. Reports which coordinate semi-norm is the weak limit and
    whether the sequence converges to the full-flag point in the Satake sense."""
    v = v or _default_place()
    _require_nonarch(v)
    q = _base(v)
    ys = tuple(y_schedule) if y_schedule is not None else geometric_schedule(q, 32)
    xs = tuple(x_abs_schedule) if x_abs_schedule is not None else tuple(0 for _ in ys)
    if len(xs) != len(ys):
        raise PreconditionError("schedules of different length")
    pairs = tuple(zip(ys, xs))
    fam = SeqSpec("mu_y o g_x", lambda p: mu_y_gx(p[0], element_of_abs(p[1], v), v), pairs)
    alpha = standard_boundary_point(v, 3, (1, 2))
    found = None
    weak = {}
    for k in (1, 2, 3):
        w = weak_limit_check(fam, coordinate_seminorm(v, 3, {k}), tol=tol)
        weak[k] = w.converges
        if w.converges and found is None:
            found = k
    s = satake_limit_check(fam, alpha, tol=tol)
    return {"name": "d3weak", "place": str(v),
            "weak_limit_coordinate": found, "weak_checks": {str(k): c for k, c in weak.items()},
            "satake_to_full_flag": s.converges,
            "schedule": [[float(a), float(b)] for a, b in pairs]}


def example_tow2(r=2, v: Place | None = None, n: int | None = None,
                 tol: float = 1e-9) -> dict:
    """mu_{x,eps} with eps = |x|/r: weak limit (W, mu) but the restrictions to W
    converge to max(|a|, r|b|)."""
    v = v or Place.padic(3)
    _require_nonarch(v)
    q = _base(v)
    n = _length(v, n)
    r = Fraction(r) if not v.is_archimedean else float(r)
    xabs = geometric_schedule(1 / q if isinstance(q, Fraction) else 0.5, n, start=1)

    def term(s):
        x = element_of_abs(s, v)
        return mu_x_eps(x, normalized_abs(x, v) / r, v)

    fam = SeqSpec("mu_{x,eps}", term, xabs)
    weak = weak_limit_check(fam, coordinate_seminorm(v, 3, {1, 2}), tol=tol)
    one = flag_ring_one(v)
    W = la.Subspace.span([(one, 0 * one, 0 * one), (0 * one, one, 0 * one)], 3)
    expected = Norm.standard(v, 2, (1, r))
    mu = Norm.standard(v, 2)
    dists = [class_distance(restrict(m, W), expected) for m in fam.terms()]
    restr_conv = _settled(dists, tol)
    last = restrict(fam.terms()[-1], W)
    return {"name": "tow2", "place": str(v), "r": float(r),
            "weak_converges_to_W_mu": weak.converges,
            "restriction_converges_to_max_a_rb": restr_conv,
            "restriction_limit_weights": [1.0, float(r)],
            "restriction_limit_equals_mu": class_eq(expected, mu, tol),
            "last_restriction_equals_mu": class_eq(last, mu, tol),
            "discontinuous": weak.converges and restr_conv and not class_eq(expected, mu, tol)}


# --- non-Hausdorff demonstration ----------------------------------------------------

def merge_threshold(a, b, v: Place):
    """Largest s such that (a, s*(1..1)) and (b, s*(1..1)) have the same image.
    For d = 2 this is exactly 1 / |b - a|."""
    if v.is_archimedean:
        raise PreconditionError("the demonstration needs a non-archimedean place")
    a = la.map_entries(la.as_mat(a), v.coerce)
    b = la.map_entries(la.as_mat(b), v.coerce)
    if not (is_unipotent_upper(a) and is_unipotent_upper(b)):
        raise PreconditionError("a and b must be unipotent upper triangular")
    if a == b:
        raise PreconditionError("a and b must differ")
    c = la.matmul(la.inverse(a), b)
    d = len(a)
    best = None
    for i in range(d):
        for j in range(i + 1, d):
            if c[i][j] == 0:
                continue
            h = normalized_abs(c[i][j], v)
            bound = 1 / h if j - i == 1 else float(h) ** (-1.0 / (j - i))
            best = bound if best is None or bound < best else best
    return best


def nonhausdorff_demo(a, b, v: Place) -> dict:
    s = merge_threshold(a, b, v)
    d = len(a)
    a = la.map_entries(la.as_mat(a), v.coerce)
    b = la.map_entries(la.as_mat(b), v.coerce)
    at = tuple(s for _ in range(d - 1))
    above = tuple(x * v.q for x in at)
    merged = chart_images_equal(ChartPoint(a, at), ChartPoint(b, at), v)
    fiber = chart_fiber_eq(ChartPoint(a, at), ChartPoint(b, at), v)
    split = not chart_images_equal(ChartPoint(a, above), ChartPoint(b, above), v)
    zero = tuple(0 * x for x in at)
    sa = sharp_chart_point(ChartPoint(a, zero), v)
    sb = sharp_chart_point(ChartPoint(b, zero), v)
    return {"threshold": s, "merged_at_threshold": merged, "fiber_eq_at_threshold": fiber,
            "separate_above_threshold": split, "sharp_limits_differ": not sa.same_as(sb)}


# --- the upper half plane --------------------------------------------------------

INFINITY = "inf"


def halfplane_norm(z: complex) -> Norm:
    """The real norm whose class is x + iy: Gram [[1, -x], [-x, x^2 + y^2]]."""
    from .reduction import norm_from_gram
    x, y = z.real, z.imag
    if y <= 0:
        raise PreconditionError("point is not in the upper half plane")
    return norm_from_gram([[1.0, -x], [-x, x * x + y * y]])


def halfplane_neighborhood(z, kind: str, param) -> bool:
    """Membership in U_c = {y >= c} or U_f = {y >= f(x)} (f piecewise linear
    through the (x, y) table, constant beyond its ends); infinity is in both."""
    if z == INFINITY or (isinstance(z, float) and math.isinf(z)):
        return True
    z = complex(z)
    if z.imag <= 0:
        raise PreconditionError("point is not in the upper half plane")
    if kind == "c":
        return z.imag >= float(param)
    if kind == "f":
        xs, ys = zip(*sorted((float(a), float(b)) for a, b in param))
        return z.imag >= float(np.interp(z.real, xs, ys))
    raise PreconditionError("kind must be 'c' or 'f'")
