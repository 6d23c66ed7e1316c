"""Siegel sets, t-coordinates and reduction of positive definite forms.

Interior points at the real place are often given by a Gram matrix G, meaning
the norm x -> sqrt(x^T G x). The group acts by (gamma . G) = gamma^{-T} G gamma^{-1}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg as la
from .boundary import phi_prime_P
from .decomp import (ChartPoint, chart_fiber_eq, chart_section, chart_section_boundary,
                     is_unipotent_upper)
from .errors import NotANormError, PreconditionError
from .norms import Norm, act, leq
from .points import BoundaryPoint, flag_ring_one
from .scalars import Place, normalized_abs

CLASSICAL_C1 = 2 / math.sqrt(3)


# --- Gram matrices ----------------------------------------------------------------

def norm_from_gram(G, place: Place | None = None) -> Norm:
    """The norm sqrt(x^T G x) (real) or x^* G x (complex)."""
    place = place or Place.real()
    if not place.is_archimedean:
        raise PreconditionError("Gram matrices describe archimedean norms")
    A = np.array([[complex(x) if place.kind == "complex" else float(x) for x in r] for r in G])
    if not np.allclose(A, A.conj().T, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise NotANormError("Gram matrix is not symmetric")
    try:
        L = np.linalg.cholesky(A)              # A = L L^*
    except np.linalg.LinAlgError as exc:
        raise NotANormError("Gram matrix is not positive definite") from exc
    R = L.conj().T                             # mu(x) = |R x|
    Rinv = np.linalg.inv(R)
    d = len(G)
    conv = complex if place.kind == "complex" else float
    basis = tuple(tuple(conv(Rinv[i, j]) for j in range(d)) for i in range(d))
    return Norm(place, basis, (1.0,) * d)


def _is_exact_matrix(G) -> bool:
    return all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for r in G for x in r)


def _as_gram(G):
    G = la.as_mat(G)
    if _is_exact_matrix(G):
        return la.map_entries(G, Fraction)
    return la.map_entries(G, float)


def check_positive_definite(G):
    n = len(G)
    if any(len(r) != n for r in G):
        raise NotANormError("Gram matrix must be square")
    for i in range(n):
        for j in range(n):
            if G[i][j] != G[j][i] and abs(G[i][j] - G[j][i]) > 1e-12:
                raise NotANormError("Gram matrix is not symmetric")
    for k in range(1, n + 1):
        if la.det(la.submatrix(G, range(k), range(k))) <= 0:
            raise NotANormError("Gram matrix is not positive definite")


# --- LLL on a Gram matrix -------------------------------------------------------------

def _gso(M):
    d = len(M)
    mu = [[M[0][0] * 0 for _ in range(d)] for _ in range(d)]
    B = [M[0][0] * 0] * d
    for i in range(d):
        for j in range(i):
            s = M[i][j]
            for k in range(j):
                s -= mu[j][k] * mu[i][k] * B[k]
            mu[i][j] = s / B[j]
        s = M[i][i]
        for k in range(i):
            s -= mu[i][k] ** 2 * B[k]
        B[i] = s
        mu[i][i] = s * 0 + 1
    return mu, B


def _round(x):
    return math.floor(x + Fraction(1, 2)) if isinstance(x, Fraction) else math.floor(x + 0.5)


def _apply_col_op(M, U, k, j, q):
    """b_k <- b_k - q b_j on the basis, Gram matrix and transform."""
    d = len(M)
    for r in range(d):
        U[r][k] -= q * U[r][j]
    for r in range(d):
        M[r][k] -= q * M[r][j]
    for c in range(d):
        M[k][c] -= q * M[j][c]


def _swap(M, U, k):
    for r in M:
        r[k], r[k - 1] = r[k - 1], r[k]
    M[k], M[k - 1] = M[k - 1], M[k]
    for r in U:
        r[k], r[k - 1] = r[k - 1], r[k]


def lll_gram(M0, delta=Fraction(99, 100), max_iter: int = 100000):
    """LLL on the lattice with Gram matrix M0. Returns (U, M) with M = U^T M0 U
    size-reduced and satisfying the Lovasz condition for ``delta``."""
    exact = _is_exact_matrix(M0)
    M = [list(r) for r in M0]
    d = len(M)
    U = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    slack = 0 if exact else 1e-12
    if not exact:
        delta = float(delta)
    k, it = 1, 0
    while k < d:
        it += 1
        if it > max_iter:
            raise RuntimeError("LLL did not terminate")
        for j in range(k - 1, -1, -1):
            mu, _ = _gso(M)
            q = _round(mu[k][j])
            if q and abs(mu[k][j]) > Fraction(1, 2) + slack:
                _apply_col_op(M, U, k, j, q)
        mu, B = _gso(M)
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1] - slack * abs(B[k - 1]):
            k += 1
        else:
            _swap(M, U, k)
            k = max(k - 1, 1)
    return U, M


@dataclass
class ReductionResult:
    gamma: tuple
    g: tuple
    t: tuple
    c1: float
    gram: tuple
    certificate: dict = field(default_factory=dict)


def _normalize_sign(U):
    for r in U:
        for x in r:
            if x != 0:
                return U if x > 0 else [[-y for y in row] for row in U]
    return U


def _chart_of(U, M0, n):
    """t and g of gamma . x for gamma = J U^T, read off the GSO of U^T M0 U."""
    M = la.matmul(la.matmul(la.transpose(U), M0), U)
    mu, B = _gso([list(r) for r in M])
    Brev = B[::-1]
    t = tuple(math.sqrt(float(Brev[i + 1]) / float(Brev[i])) for i in range(n - 1))
    # M = L D L^T with L unit lower; the chart element is J L J
    g = tuple(tuple(1 if i == j else (mu[n - 1 - i][n - 1 - j] + 0 if j > i else 0)
                    for j in range(n)) for i in range(n))
    return t, g


def _same_gram(A, B, tol=1e-12):
    if _is_exact_matrix(A) and _is_exact_matrix(B):
        return la.as_mat(A) == la.as_mat(B)
    scale = max(abs(float(x)) for r in A for x in r)
    return all(abs(float(a) - float(b)) <= tol * scale for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def reduce_point(G, d: int | None = None) -> ReductionResult:
    """gamma in GL_d(Z) with the chart coordinates of gamma . x satisfying
    t_i <= 2/sqrt(3) and |g_ij| <= 1/2 (x given by the Gram matrix G).

    When gamma . x = x already, gamma = 1 is returned."""
    G = _as_gram(G)
    n = len(G)
    if d is not None and d != n:
        raise PreconditionError(f"Gram matrix has size {n}, expected {d}")
    check_positive_definite(G)
    M0 = la.inverse(G)
    J = [[1 if i + j == n - 1 else 0 for j in range(n)] for i in range(n)]
    U, _ = lll_gram(M0, Fraction(99, 100))
    # polish with delta = 1, starting from the delta = 0.99 output
    Mstart = la.matmul(la.matmul(la.transpose(U), M0), U)
    U2, _ = lll_gram(Mstart, 1)
    U = la.matmul(U, U2)
    U = [[int(x) for x in r] for r in U]
    gamma = _normalize_sign(la.matmul(J, la.transpose(U)))
    gamma = tuple(tuple(int(x) for x in r) for r in gamma)
    ginv = la.inverse(gamma)
    reduced = la.matmul(la.matmul(la.transpose(ginv), G), ginv)
    if _same_gram(reduced, G):
        gamma = tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
        reduced = G
    t, g = _chart_of(la.transpose(la.matmul(J, gamma)), M0, n)
    cert = {"t_max": max(t) if t else 0.0,
            "g_max": max((abs(float(g[i][j])) for i in range(n) for j in range(i + 1, n)),
                         default=0.0),
            "lll_delta": "99/100 then 1"}
    return ReductionResult(gamma, g, t, CLASSICAL_C1, reduced, cert)


def gram_act(gamma, G):
    gi = la.inverse(gamma)
    return la.matmul(la.matmul(la.transpose(gi), G), gi)


# --- Siegel sets --------------------------------------------------------------------

@dataclass(frozen=True)
class SiegelParams:
    c1: float
    C: float = 0.5
    c2: float = 1.0
    c3: float | None = None
    I: frozenset = frozenset()

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 < 1 or self.C < 0:
            raise PreconditionError("need c1 > 0, c2 >= 1 and C >= 0")


def t_coords(x, v: Place | None = None) -> tuple:
    """Full-flag t-coordinates of an interior class or a point of X(B)."""
    bp = x if isinstance(x, BoundaryPoint) else BoundaryPoint.interior(x)
    v = v or bp.place
    B = la.Flag.standard(range(1, bp.d), bp.d, flag_ring_one(v))
    if not bp.flag.is_standard():
        raise PreconditionError("the point's flag does not coarsen the standard Borel flag")
    return phi_prime_P(bp, B)


def parabolic_type_of(bp: BoundaryPoint) -> frozenset:
    return bp.parabolic_type()


def _bound_ok(g, C, v, tol=1e-9):
    d = len(g)
    return all(leq(normalized_abs(g[i][j], v), C, tol) for i in range(d) for j in range(i + 1, d))


def _fiber_reduce(cp: ChartPoint, v: Place) -> ChartPoint:
    """Greedy: clear every entry of g that the fiber relation allows."""
    d = cp.d
    g = [list(r) for r in la.map_entries(cp.g, v.coerce)]
    for j in range(1, d):
        for i in range(j - 1, -1, -1):
            x = g[i][j]
            if x == 0:
                continue
            prod = cp.t[0] * 0 + 1
            for k in range(i, j):
                prod = prod * cp.t[k]
            if prod == 0 or leq(normalized_abs(x, v) * prod, 1):
                for r in range(d):
                    g[r][j] = g[r][j] - x * g[r][i]
    return ChartPoint(la.as_mat(g), cp.t)


def siegel_member(x, sp: SiegelParams, v: Place | None = None, tol: float = 1e-9):
    """(is x in S(C; c1, c2)?, certificate chart point)."""
    bp = x if isinstance(x, BoundaryPoint) else BoundaryPoint.interior(x)
    v = v or bp.place
    cp = chart_section_boundary(bp)
    if not v.is_archimedean:
        reduced = _fiber_reduce(cp, v)
        if not chart_fiber_eq(cp, reduced, v):
            raise AssertionError("fiber reduction left the fiber")
        cp = reduced
    ok = all(leq(ti, sp.c1, tol) for ti in cp.t) and _bound_ok(cp.g, sp.C, v, tol)
    if ok and sp.I:
        ok = all(leq(cp.t[i - 1], sp.c3, tol) for i in sp.I)
    return ok, cp


def e_exponent(i: int, j: int, d: int) -> Fraction:
    if not (1 <= i <= d - 1 and 1 <= j <= d - 1):
        raise PreconditionError("e(i, j) needs 1 <= i, j <= d-1")
    if j <= i:
        return Fraction(j * (d - i), i)
    return Fraction(d - j)


@dataclass(frozen=True)
class LemdetReport:
    lhs: float
    rhs: float
    equal: bool
    printed_rhs: float


def lemdet_check(g, x: Norm, i: int, v: Place | None = None, tol: float = 1e-9) -> LemdetReport:
    """Both sides of the determinant identity for t-coordinate ratios.

    With t_j(gx)/t_j(x) = |a_{j+1}/a_j| for diagonal g, the identity reads
    prod (t_j(gx)/t_j(x))^e(i,j) = |det(g on V/V')| / |det(g on V')|^((d-i)/i);
    ``printed_rhs`` is the reciprocal orientation, reported for comparison."""
    v = v or x.place
    d = x.d
    g = la.map_entries(la.as_mat(g), v.coerce)
    if not (1 <= i <= d - 1):
        raise PreconditionError("i out of range")
    if any(g[r][c] != 0 for r in range(i, d) for c in range(i)):
        raise PreconditionError("g does not preserve the span of the first i basis vectors")
    t0 = t_coords(x, v)
    t1 = t_coords(act(g, x), v)
    lhs = 1.0
    for j in range(1, d):
        lhs *= (float(t1[j - 1]) / float(t0[j - 1])) ** float(e_exponent(i, j, d))
    top = float(normalized_abs(la.det(la.submatrix(g, range(i), range(i))), v))
    bot = float(normalized_abs(la.det(la.submatrix(g, range(i, d), range(i, d))), v))
    rhs = bot / top ** ((d - i) / i)
    eq = abs(lhs - rhs) <= tol * max(abs(lhs), abs(rhs))
    return LemdetReport(lhs, rhs, eq, 1 / rhs)


def t_ratio_envelope(pairs) -> float:
    """max over pairs (x, gamma x) and i of max(t_i(gx)/t_i(x), t_i(x)/t_i(gx))."""
    A = 1.0
    for x, y in pairs:
        for a, b in zip(t_coords(x), t_coords(y)):
            a, b = float(a), float(b)
            A = max(A, a / b, b / a)
    return A
