"""Structural maps between boundary points, graded data and chart coordinates.

Parabolics containing the upper-triangular Borel are given by standard flags
(``Flag.standard``). Graded pieces are numbered 0..m and ``t`` vectors for a
flag with m steps are indexed t_1..t_m (Python index i-1).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from . import linalg as la
from .decomp import ChartPoint, chart_point_to_boundary, chart_section
from .errors import PreconditionError, SingularMatrixError, UnsupportedPlaceError
from .norms import Norm, abs_rel, act, induce_on_quotient_coords
from .points import BoundaryPoint, FlatPoint, SharpPoint, flag_ring_one
from .scalars import Place


# --- canonical surjection and induced data -------------------------------------

def to_flat(bp: BoundaryPoint) -> FlatPoint:
    V0 = bp.chain()[1]
    return FlatPoint(bp.place, V0, bp.graded[0])


def _check_refines(bp: BoundaryPoint, P: la.Flag):
    if P.d != bp.d:
        raise PreconditionError("flag in the wrong dimension")
    if not P.refines(bp.flag):
        raise PreconditionError("the point's flag is not coarser than P")


def _containing_piece(bp: BoundaryPoint, lo: la.Subspace, hi: la.Subspace) -> int:
    ch = bp.chain()
    for j in range(1, len(ch)):
        if ch[j].contains_subspace(hi) and lo.contains_subspace(ch[j - 1]):
            return j - 1
    raise PreconditionError("no graded piece of the point contains the subquotient")


def _induced_piece(bp: BoundaryPoint, j: int, lo: la.Subspace, hi: la.Subspace) -> Norm:
    """Norm induced by the point's j-th graded class on hi/lo, in the complement
    coordinates of Quotient(hi, lo)."""
    qj = bp.quotients()[j]
    target = la.Quotient(hi, lo)
    lo_img = [qj.coords(w) for w in lo.basis]
    lo_img = [c for c in lo_img if any(x != 0 for x in c)]
    H2 = la.Subspace.span(lo_img, qj.dim) if lo_img else la.Subspace(qj.dim, ())
    cols = list(H2.basis) + [qj.coords(c) for c in target.complement]
    return induce_on_quotient_coords(bp.graded[j], la.from_columns(cols), H2.dim)


def phi_P(bp: BoundaryPoint, P: la.Flag) -> tuple:
    """Graded norms induced on the pieces of P (P must refine the point's flag)."""
    _check_refines(bp, P)
    ch = P.chain(flag_ring_one(bp.place))
    out = []
    for i in range(1, len(ch)):
        j = _containing_piece(bp, ch[i - 1], ch[i])
        out.append(_induced_piece(bp, j, ch[i - 1], ch[i]))
    return tuple(out)


def _root(x, n):
    return float(x) ** (1.0 / n)


def phi_prime_P(bp: BoundaryPoint, P: la.Flag, bases=None) -> tuple:
    """The t-vector of the point relative to P; bases[i] is a basis matrix of
    the i-th graded piece of P in complement coordinates (default: identity)."""
    _check_refines(bp, P)
    v = bp.place
    dims = P.graded_dims()
    if bases is None:
        bases = [la.identity(k, v.one()) for k in dims]
    if len(bases) != len(dims):
        raise PreconditionError("one basis per graded piece is required")
    nu = phi_P(bp, P)
    steps = set(bp.flag.steps)
    ch = P.chain(flag_ring_one(v))
    t = []
    for i in range(1, P.m + 1):
        if ch[i] in steps:
            t.append(0.0)
            continue
        a = abs_rel(nu[i - 1], bases[i - 1])
        b = abs_rel(nu[i], bases[i])
        t.append(_root(a, dims[i - 1]) / _root(b, dims[i]))
    return tuple(t)


def psi_P(bp: BoundaryPoint, P: la.Flag, bases=None):
    return phi_P(bp, P), phi_prime_P(bp, P, bases)


# --- xi and xi* ------------------------------------------------------------------

def _bounds(P: la.Flag):
    c = (0,) + P.dims + (P.d,)
    return c


def _check_standard(P: la.Flag):
    if not P.is_standard():
        raise PreconditionError("P must be spanned by leading standard vectors")


def _check_unipotent_radical(g, P: la.Flag, v: Place):
    c = _bounds(P)
    d = P.d
    block = [next(i for i in range(len(c) - 1) if c[i] <= k < c[i + 1]) for k in range(d)]
    for i in range(d):
        for j in range(d):
            x = g[i][j]
            if block[i] > block[j] and x != 0:
                raise PreconditionError("g does not lie in P_u (nonzero below the blocks)")
            if block[i] == block[j] and x != (1 if i == j else 0):
                raise PreconditionError("g does not lie in P_u (nontrivial diagonal block)")


def _normalize_unit(mu: Norm) -> Norm:
    """The representative with |mu : standard basis| = 1."""
    a = abs_rel(mu, la.identity(mu.d, mu.place.one()))
    c = float(a) ** (-1.0 / mu.d)
    return mu.scaled(c)


def xi_star(g, mus, t, P: la.Flag) -> BoundaryPoint:
    _check_standard(P)
    v = mus[0].place
    g = la.map_entries(la.as_mat(g), v.coerce)
    _check_unipotent_radical(g, P, v)
    m = P.m
    dims = P.graded_dims()
    if len(mus) != m + 1 or any(mu.d != k for mu, k in zip(mus, dims)):
        raise PreconditionError("graded classes do not match the pieces of P")
    if len(t) != m:
        raise PreconditionError(f"expected {m} t-coordinates")
    c = _bounds(P)
    J = sorted(c[i] for i in range(1, m + 1) if t[i - 1] == 0)
    cp = [0] + J + [P.d]
    tilde = [_normalize_unit(mu) for mu in mus]
    graded = []
    for i in range(len(cp) - 1):
        members = [j for j in range(m + 1) if cp[i] < c[j + 1] <= cp[i + 1]]
        r, blocks, weights = 1.0, [], []
        for n, j in enumerate(members):
            if n:
                r = r / float(t[j - 1])
            blocks.append(tilde[j].basis)
            weights.extend(r * w for w in tilde[j].weights)
        nu = Norm(v, la.block_diag(blocks), weights)
        blk = la.submatrix(g, range(cp[i], cp[i + 1]), range(cp[i], cp[i + 1]))
        graded.append(act(blk, nu))
    flag = la.Flag.standard(J, P.d, flag_ring_one(v))
    return BoundaryPoint(v, flag, tuple(graded))


def _full_t(P: la.Flag, sections, t):
    full = []
    for i, cp in enumerate(sections):
        if i:
            full.append(t[i - 1])
        full.extend(cp.t)
    return tuple(full)


def xi(g, mus, t, P: la.Flag) -> BoundaryPoint:
    """Chart image of (g * blockdiag(b_i), t combined with the s_i), where
    (b_i, s_i) are chart sections of the graded classes."""
    _check_standard(P)
    v = mus[0].place
    g = la.map_entries(la.as_mat(g), v.coerce)
    _check_unipotent_radical(g, P, v)
    secs = [chart_section(mu, v) for mu in mus]
    b = la.block_diag([la.map_entries(s.g, v.coerce) for s in secs])
    full = _full_t(P, secs, tuple(t))
    return chart_point_to_boundary(ChartPoint(la.matmul(g, b), full), v)


def chart_coordinates_of_piece(mu: Norm) -> tuple:
    """I_i: the t-part of a chart section of an interior class."""
    return chart_section(mu, mu.place).t


def xixi_correction(mus, t, P: la.Flag) -> tuple:
    """t' with xi(g, mu, t) = xi_star(g, mu, t')."""
    _check_standard(P)
    c = _bounds(P)
    dims = P.graded_dims()
    I = [chart_coordinates_of_piece(mu) for mu in mus]
    out = []
    for i in range(1, P.m + 1):
        f = float(t[i - 1])
        for k, s in enumerate(I[i - 1]):          # j = c(i-2) + 1 + k
            f *= float(s) ** ((k + 1) / dims[i - 1])
        for k, s in enumerate(I[i]):              # j = c(i-1) + 1 + k
            j = c[i] + 1 + k
            f *= float(s) ** ((c[i + 1] - j) / dims[i])
        out.append(f)
    return tuple(out)


# --- apartment ---------------------------------------------------------------------

def apartment_act_diag(a_abs, t) -> tuple:
    """t_j -> t_j |a_{j+1}| / |a_j|."""
    if len(a_abs) != len(t) + 1:
        raise PreconditionError("need d absolute values for d-1 coordinates")
    if any(x <= 0 for x in a_abs):
        raise PreconditionError("diagonal absolute values must be positive")
    return tuple(tj * a_abs[j + 1] / a_abs[j] for j, tj in enumerate(t))


def _blocks_of_t(t):
    d = len(t) + 1
    zeros = [j + 1 for j, x in enumerate(t) if x == 0]
    c = [0] + zeros + [d]
    return [set(range(c[i] + 1, c[i + 1] + 1)) for i in range(len(c) - 1)]


def apartment_act_perm(sigma, t, zero_set=None) -> tuple:
    """Action of a block permutation; sigma is a list with sigma[i-1] = sigma(i).

    Blocks are those of the parabolic with Delta(P) = zero_set (default: the
    zero pattern of t)."""
    d = len(t) + 1
    sigma = [int(s) for s in sigma]
    if sorted(sigma) != list(range(1, d + 1)):
        raise PreconditionError("sigma must be a permutation of 1..d")
    if zero_set is None:
        blocks = _blocks_of_t(t)
    else:
        c = [0] + sorted(zero_set) + [d]
        blocks = [set(range(c[i] + 1, c[i + 1] + 1)) for i in range(len(c) - 1)]
        if any(t[j - 1] == 0 for j in range(1, d) if j not in set(zero_set)):
            raise PreconditionError("t vanishes outside the parabolic's simple roots")
    for blk in blocks:
        if {sigma[i - 1] for i in blk} != blk:
            raise PreconditionError("sigma is not block-compatible")
    f = [0] * (d + 1)
    for i in range(1, d + 1):
        f[sigma[i - 1]] = i                        # f = sigma^{-1}
    out = []
    for j in range(1, d):
        a, b = f[j], f[j + 1]
        if a < b:
            p = t[0] * 0 + 1
            for k in range(a, b):
                p = p * t[k - 1]
        else:
            p = t[0] * 0 + 1
            for k in range(b, a):
                if t[k - 1] == 0:
                    raise PreconditionError("inverse of a vanishing coordinate")
                p = p / t[k - 1]
        out.append(p)
    return tuple(out)


def t_from_r(r) -> tuple:
    return tuple(r[j] / r[j + 1] for j in range(len(r) - 1))


@dataclass(frozen=True)
class ApartmentElement:
    """h = diag(w^e) * s_sigma; it sends log-coordinates z to
    (z_{sigma^{-1}(i)})_i - e, so x lies in hC iff P_sigma(y + e) lies in C."""

    diag_exponents: tuple
    perm: tuple


def _in_chamber(w) -> bool:
    return all(w[i] <= w[i + 1] for i in range(len(w) - 1)) and w[-1] <= w[0] + 1


def chamber_vertices(h: ApartmentElement):
    """Vertices of hC in log-coordinates, normalized so the first entry is 0."""
    d = len(h.perm)
    verts = []
    for k in range(1, d + 1):
        base = [Fraction(0)] * k + [Fraction(1)] * (d - k)   # vertex of C
        y = [Fraction(0)] * d
        for i in range(d):
            y[h.perm[i] - 1] = base[i] - h.diag_exponents[h.perm[i] - 1]
        y0 = y[0]
        verts.append(tuple(x - y0 for x in y))
    return verts


def in_translate_by_barycentric(y, h: ApartmentElement) -> bool:
    """Independent membership test: y (mod constants) is a convex combination
    of the vertices of hC."""
    d = len(y)
    V = chamber_vertices(h)
    rows = [[V[k][i] for k in range(d)] + [Fraction(1)] for i in range(d)]
    rows.append([Fraction(1)] * d + [Fraction(0)])
    rhs = [Fraction(x) for x in y] + [Fraction(1)]
    sol = la.solve(la.as_mat(rows), rhs)
    return all(x >= 0 for x in sol[:d])


def apartment_cover(y, v: Place):
    """All chambers hC of the apartment containing the point with rational
    log_q-coordinates y, one representative h per chamber."""
    if v.is_archimedean:
        raise UnsupportedPlaceError("apartments exist at non-archimedean places only")
    try:
        y = [Fraction(x) for x in y]
    except (TypeError, ValueError) as exc:
        raise PreconditionError("log-coordinates must be rational") from exc
    d = len(y)
    perms = list(itertools.permutations(range(1, d + 1)))
    out, seen = [], set()
    for perm in perms:
        s0 = perm[0] - 1
        choices = []
        for i in range(d):
            k = perm[i] - 1
            if i == 0:
                choices.append([0])
                continue
            lo = math.ceil(y[s0] - y[k])
            hi = math.floor(y[s0] + 1 - y[k])
            choices.append(list(range(lo, hi + 1)))
        for ns in itertools.product(*choices):
            e = [0] * d
            for i in range(d):
                e[perm[i] - 1] = ns[i]
            w = [y[perm[i] - 1] + e[perm[i] - 1] for i in range(d)]
            if not _in_chamber(w):
                continue
            h = ApartmentElement(tuple(e), tuple(perm))
            key = frozenset(chamber_vertices(h))
            if key in seen:
                continue
            seen.add(key)
            out.append((h, tuple(w)))
    return out


# --- global action -------------------------------------------------------------------

def _induced_between(q_old: la.Quotient, q_new: la.Quotient, g):
    cols = [q_new.coords(la.matvec(g, w)) for w in q_old.complement]
    return la.from_columns(cols)


def _push_flag(g, flag: la.Flag, v: Place) -> la.Flag:
    if la.mat_is_inexact(g):
        if not la.stabilizes(g, flag):
            raise PreconditionError("a local (non-rational) element must stabilize the flag")
        return flag
    return flag.image(g)


def act_global(g, pt):
    """Action of an invertible matrix on boundary, flat and sharp points."""
    if isinstance(pt, SharpPoint):
        new_bp, maps = _act_boundary(g, pt.point)
        v = pt.point.place
        gv = la.map_entries(la.as_mat(g), v.coerce)
        Tinv = la.inverse(la.block_diag(maps))
        s = la.map_entries(pt.splitting, v.coerce)
        return SharpPoint(new_bp, la.matmul(la.matmul(gv, s), Tinv))
    if isinstance(pt, FlatPoint):
        v = pt.place
        g = la.as_mat(g)
        if not la.is_invertible(g):
            raise SingularMatrixError("acting matrix is singular")
        if la.mat_is_inexact(g):
            if not all(pt.W.contains(la.matvec(g, w)) for w in pt.W.basis):
                raise PreconditionError("a local element must stabilize W")
            W2 = pt.W
        else:
            W2 = pt.W.image(g)
        T = la.from_columns([W2.coords(la.matvec(g, w)) for w in pt.W.basis])
        return FlatPoint(v, W2, act(T, pt.cls))
    if isinstance(pt, BoundaryPoint):
        return _act_boundary(g, pt)[0]
    raise PreconditionError(f"cannot act on {type(pt).__name__}")


def _act_boundary(g, bp: BoundaryPoint):
    v = bp.place
    g = la.as_mat(g)
    if not la.is_invertible(g):
        raise SingularMatrixError("acting matrix is singular")
    if v.kind == "laurent":
        g = la.map_entries(g, v.coerce)
    flag2 = _push_flag(g, bp.flag, v)
    new_chain = flag2.chain(flag_ring_one(v))
    old_q = bp.quotients()
    graded, maps = [], []
    for i, q in enumerate(old_q):
        qn = la.Quotient(new_chain[i + 1], new_chain[i])
        T = _induced_between(q, qn, g)
        maps.append(la.map_entries(T, v.coerce))
        graded.append(act(T, bp.graded[i]))
    return BoundaryPoint(v, flag2, tuple(graded)), maps


def sharp_chart_point(cp: ChartPoint, v: Place) -> SharpPoint:
    """g (P, mu, s) with s the splitting given by the standard basis."""
    d = cp.d
    I = cp.zero_set()
    base = chart_point_to_boundary(ChartPoint(la.identity(d, v.one()), cp.t), v)
    s = SharpPoint(base, la.identity(d, v.one()))
    return act_global(cp.g, s)
