"""Iwasawa and Bruhat decompositions and the chart (g, t) -> boundary point.

A chart point is a pair (g, t) with g unipotent upper triangular and
t in R_{>=0}^{d-1}. With r_1 = 1 and r_{i+1} = r_i / t_i, the interior chart
image is the class of g mu^(r), where mu^(r) is the norm with the standard
basis and weights r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg as la
from .errors import PreconditionError, SingularMatrixError, UnsupportedPlaceError
from .norms import Norm, act, adapted_basis, class_eq, leq
from .points import BoundaryPoint, flag_ring_one
from .scalars import INF, Place, normalized_abs, valuation


@dataclass(frozen=True)
class IwasawaTriple:
    u: tuple
    a: tuple
    k: tuple
    t: tuple
    exponents: tuple | None = None

    def product(self):
        return la.matmul(la.matmul(self.u, self.a), self.k)


def _t_from_diag(diag, v: Place):
    out = []
    for i in range(len(diag) - 1):
        out.append(normalized_abs(diag[i + 1], v) / normalized_abs(diag[i], v))
    return tuple(out)


def iwasawa(g, v: Place) -> IwasawaTriple:
    """g = u a k with u in B_u, a in A_v and k in the standard maximal compact."""
    g = la.map_entries(la.as_mat(g), v.coerce)
    d = len(g)
    if not la.is_invertible(g):
        raise SingularMatrixError("Iwasawa decomposition of a singular matrix")
    if v.is_archimedean:
        return _iwasawa_arch(g, v)
    return _iwasawa_nonarch(g, v)


def _iwasawa_arch(g, v: Place) -> IwasawaTriple:
    cplx = v.kind == "complex"
    dt = complex if cplx else float
    G = np.array(g, dtype=dt)
    Q, R = np.linalg.qr(np.linalg.inv(G))
    ph = np.diag(R) / np.abs(np.diag(R))
    Q = Q * ph
    R = R / ph[:, None]
    Tm = np.linalg.inv(R)              # upper triangular, positive diagonal
    K = Q.conj().T
    a = np.real(np.diag(Tm))
    U = Tm / a                          # scale columns
    d = G.shape[0]
    conv = (lambda z: complex(z)) if cplx else (lambda z: float(np.real(z)))
    u = tuple(tuple(conv(U[i, j]) if j > i else (conv(1.0) if i == j else conv(0.0))
                    for j in range(d)) for i in range(d))
    am = la.diag([conv(x) for x in a])
    k = tuple(tuple(conv(K[i, j]) for j in range(d)) for i in range(d))
    return IwasawaTriple(u, am, k, _t_from_diag([float(x) for x in a], v))


def _iwasawa_nonarch(g, v: Place) -> IwasawaTriple:
    d = len(g)
    b = [list(r) for r in g]
    kp = [list(r) for r in la.identity(d, v.one())]

    def swap_cols(M, i, j):
        for r in M:
            r[i], r[j] = r[j], r[i]

    def add_col(M, src, dst, f):
        for r in M:
            r[dst] = r[dst] + f * r[src]

    for row in range(d - 1, -1, -1):
        live = range(row + 1)
        vals = [valuation(b[row][j], v) for j in live]
        jp = min(live, key=lambda j: (vals[j], -j))
        if vals[jp] == INF:
            raise SingularMatrixError("matrix is singular")
        if jp != row:
            swap_cols(b, jp, row)
            swap_cols(kp, jp, row)
        piv = b[row][row]
        for j in range(row):
            if b[row][j] != 0:
                f = -b[row][j] / piv
                add_col(b, row, j, f)
                add_col(kp, row, j, f)
    diag = [b[i][i] for i in range(d)]
    w = v.uniformizer()
    n = [valuation(x, v) for x in diag]
    a = [w ** e for e in n]
    units = [x / ai for x, ai in zip(diag, a)]
    u = tuple(tuple(b[i][j] / diag[j] for j in range(d)) for i in range(d))
    kinv = la.inverse(kp)
    k = la.matmul(la.diag(units), kinv)
    return IwasawaTriple(u, la.diag(a), k, _t_from_diag(diag, v), tuple(n))


def is_compact_element(k, v: Place, tol: float = 1e-9) -> bool:
    """k in O_d / U_d (archimedean) or GL_d(O_v)."""
    if v.is_archimedean:
        K = np.array(k, dtype=complex)
        return bool(np.allclose(K @ K.conj().T, np.eye(len(k)), atol=tol))
    kinv = la.inverse(k)
    return all(valuation(x, v) >= 0 for M in (k, kinv) for r in M for x in r)


# --- Bruhat decomposition over F_p -------------------------------------------

def _mod(A, p):
    return [[int(x) % p for x in r] for r in A]


def _matmul_mod(A, B, p):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) % p for j in range(len(B[0]))]
            for i in range(len(A))]


def _inv_mod(A, p):
    n = len(A)
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(_mod(A, p))]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c]), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular over the residue field")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = pow(aug[c][c], -1, p)
        aug[c] = [(x * inv) % p for x in aug[c]]
        for k in range(n):
            if k != c and aug[k][c]:
                f = aug[k][c]
                aug[k] = [(a - f * b) % p for a, b in zip(aug[k], aug[c])]
    return [r[n:] for r in aug]


def bruhat_residue(gbar, p: int):
    """gbar = b w b' with b, b' upper triangular and w a permutation matrix (mod p)."""
    M = _mod(gbar, p)
    n = len(M)
    _inv_mod(M, p)
    b1 = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    b2 = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    used = set()
    for i in range(n - 1, -1, -1):
        j = next(c for c in range(n) if c not in used and M[i][c])
        used.add(j)
        inv = pow(M[i][j], -1, p)
        for c in range(j + 1, n):               # columns to the right
            if M[i][c]:
                f = (M[i][c] * inv) % p
                for r in range(n):
                    M[r][c] = (M[r][c] - f * M[r][j]) % p
                    b2[r][c] = (b2[r][c] - f * b2[r][j]) % p
        for r in range(i):                       # rows above
            if M[r][j]:
                f = (M[r][j] * inv) % p
                M[r] = [(a - f * b) % p for a, b in zip(M[r], M[i])]
                b1[r] = [(a - f * b) % p for a, b in zip(b1[r], b1[i])]
    w = [[1 if M[i][j] else 0 for j in range(n)] for i in range(n)]
    D = [[M[i][j] if i == j else 0 for j in range(n)] for i in range(n)]
    for j in range(n):
        i = next(r for r in range(n) if M[r][j])
        D[j][j] = M[i][j]
    b = _inv_mod(b1, p)
    bp = _matmul_mod(D, _inv_mod(b2, p), p)
    return (tuple(map(tuple, b)), tuple(map(tuple, w)), tuple(map(tuple, bp)))


def weyl_by_ranks(gbar, p: int):
    """Permutation matrix with the same ranks of lower-left blocks as gbar."""
    M = _mod(gbar, p)
    n = len(M)

    def rk(i, j):
        sub = [r[:j] for r in M[i:]]
        if not sub or j == 0:
            return 0
        return _rank_mod(sub, p)

    w = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            val = rk(i, j + 1) - rk(i + 1, j + 1) - rk(i, j) + rk(i + 1, j)
            w[i][j] = val
    return tuple(map(tuple, w))


def _rank_mod(A, p):
    M = [list(r) for r in A]
    rows, cols = len(M), len(M[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] % p), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = pow(M[r][c], -1, p)
        M[r] = [(x * inv) % p for x in M[r]]
        for k in range(rows):
            if k != r and M[k][c] % p:
                f = M[k][c]
                M[k] = [(a - f * b) % p for a, b in zip(M[k], M[r])]
        r += 1
        if r == rows:
            break
    return r


# --- charts -------------------------------------------------------------------

@dataclass(frozen=True)
class ChartPoint:
    g: tuple
    t: tuple

    def __post_init__(self):
        object.__setattr__(self, "g", la.as_mat(self.g))
        object.__setattr__(self, "t", tuple(self.t))
        d = len(self.g)
        if len(self.t) != d - 1:
            raise PreconditionError(f"chart point needs {d - 1} t-coordinates")
        if any(x < 0 for x in self.t):
            raise PreconditionError("t-coordinates must be nonnegative")

    @property
    def d(self):
        return len(self.g)

    def zero_set(self) -> frozenset:
        return frozenset(j + 1 for j, x in enumerate(self.t) if x == 0)


def is_unipotent_upper(g) -> bool:
    d = len(g)
    return all((g[i][j] == 1 if i == j else g[i][j] == 0)
               for i in range(d) for j in range(d) if i >= j)


def weights_from_t(t, start=None):
    """r_1 = 1, r_{j+1} = r_j / t_j."""
    one = t[0] * 0 + 1 if t else 1
    r = [one]
    for x in t:
        r.append(r[-1] / x)
    return tuple(r)


def _block_bounds(d, zero_set):
    c = [0] + sorted(zero_set) + [d]
    return [(c[i], c[i + 1]) for i in range(len(c) - 1)]


def chart_point_to_boundary(cp: ChartPoint, v: Place) -> BoundaryPoint:
    g = la.map_entries(cp.g, v.coerce)
    if not is_unipotent_upper(g):
        raise PreconditionError("chart points need a unipotent upper-triangular g")
    d = cp.d
    I = cp.zero_set()
    flag = la.Flag.standard(I, d, flag_ring_one(v))
    graded = []
    for lo, hi in _block_bounds(d, I):
        r = weights_from_t(cp.t[lo:hi - 1]) if hi - lo > 1 else (1,)
        blk = la.submatrix(g, range(lo, hi), range(lo, hi))
        base = Norm.standard(v, hi - lo, r)
        graded.append(act(blk, base))
    return BoundaryPoint(v, flag, tuple(graded))


def interior_norm(cp: ChartPoint, v: Place) -> Norm:
    if cp.zero_set():
        raise PreconditionError("chart point lies on the boundary")
    return chart_point_to_boundary(cp, v).graded[0]


def _t_le_inverse(h_abs, prod_t):
    """h_abs <= prod_t^{-1}, with 0^{-1} = infinity."""
    if prod_t == 0:
        return True
    return leq(h_abs * prod_t, 1)


def chart_fiber_eq(cp1: ChartPoint, cp2: ChartPoint, v: Place) -> bool:
    if v.is_archimedean:
        raise UnsupportedPlaceError("the fiber relation is stated for non-archimedean places")
    if cp1.d != cp2.d:
        raise PreconditionError("chart points of different dimension")
    if any(not _t_equal(a, b) for a, b in zip(cp1.t, cp2.t)):
        return False
    g1 = la.map_entries(cp1.g, v.coerce)
    g2 = la.map_entries(cp2.g, v.coerce)
    h = la.matmul(la.inverse(g1), g2)
    d = cp1.d
    for i in range(d):
        for j in range(i + 1, d):
            prod = cp1.t[i] * 0 + 1
            for k in range(i, j):
                prod = prod * cp1.t[k]
            if not _t_le_inverse(normalized_abs(h[i][j], v), prod):
                return False
    return True


def _t_equal(a, b):
    from .norms import close
    return close(a, b)


def chart_section(x: Norm, v: Place | None = None) -> ChartPoint:
    """Some (g, t) in B_u x R_{>0}^{d-1} whose chart image is the class of x."""
    v = v or x.place
    if v != x.place:
        raise PreconditionError("place mismatch")
    d = x.d
    if d == 1:
        return ChartPoint(((v.one(),),), ())
    if v.is_archimedean:
        cols = []
        for j, r in enumerate(x.weights):
            s = 1 / r if v.kind == "real" else 1 / math.sqrt(r)
            cols.append(tuple(c * s for c in la.column(x.basis, j)))
        M = la.from_columns(cols)
        tr = iwasawa(M, v)
        return ChartPoint(tr.u, tr.t)
    one = v.one()
    cols, rho = [], []
    for j in range(1, d + 1):
        Vj = la.Subspace(d, tuple(la.identity(d, one)[:j]))
        ab = adapted_basis(x, Vj)
        best, arg = None, None
        for l, (w, s) in enumerate(zip(ab.vectors, ab.weights)):
            lam = w[j - 1]
            if lam == 0:
                continue
            score = normalized_abs(lam, v) / s
            if best is None or score > best:
                best, arg = score, l
        w = ab.vectors[arg]
        lam = w[j - 1]
        u = tuple(c / lam for c in w)
        cols.append(u)
        rho.append(x(u))
    g = la.from_columns(cols)
    t = tuple(rho[i] / rho[i + 1] for i in range(d - 1))
    return ChartPoint(g, t)


def chart_section_boundary(bp: BoundaryPoint) -> ChartPoint:
    """Chart preimage of a point of X(B): its flag must be spanned by leading
    standard vectors. The unipotent-radical part is taken to be zero."""
    v = bp.place
    if not bp.flag.is_standard():
        raise PreconditionError("boundary point does not lie in the standard chart")
    zero = 0.0 if v.is_archimedean else Fraction(0)
    blocks, t = [], []
    for i, mu in enumerate(bp.graded):
        cp = chart_section(mu, v)
        blocks.append(la.map_entries(cp.g, v.coerce))
        if i:
            t.append(zero)
        t.extend(cp.t)
    return ChartPoint(la.block_diag(blocks), tuple(t))


def chart_images_equal(cp1: ChartPoint, cp2: ChartPoint, v: Place) -> bool:
    return chart_point_to_boundary(cp1, v).same_as(chart_point_to_boundary(cp2, v))
