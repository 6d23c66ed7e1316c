"""Linear algebra over exact fields (Q, F_p(T)) and over floats.

Matrices are tuples of row tuples. Entries may be ``Fraction``, ``RatFunc``,
``float`` or ``complex``; a matrix containing any float or complex entry is
treated inexactly, with partial pivoting and a relative zero tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PreconditionError, SingularMatrixError

FLOAT_TOL = 1e-12


def is_inexact(x) -> bool:
    return isinstance(x, (float, complex))


def mat_is_inexact(A) -> bool:
    return any(is_inexact(x) for row in A for x in row)


def zero_like(x):
    return x * 0


def one_like(x):
    return x * 0 + 1


def as_mat(rows) -> tuple:
    A = tuple(tuple(r) for r in rows)
    if A and any(len(r) != len(A[0]) for r in A):
        raise PreconditionError("ragged matrix")
    return A


def shape(A):
    return len(A), (len(A[0]) if A else 0)


def identity(n: int, one=1):
    z = one * 0
    return tuple(tuple(one if i == j else z for j in range(n)) for i in range(n))


def diag(entries):
    entries = list(entries)
    z = zero_like(entries[0])
    n = len(entries)
    return tuple(tuple(entries[i] if i == j else z for j in range(n)) for i in range(n))


def transpose(A):
    return tuple(zip(*A)) if A else ()


def conj(x):
    return x.conjugate() if isinstance(x, complex) else x


def conj_transpose(A):
    return tuple(tuple(conj(x) for x in col) for col in zip(*A))


def matmul(A, B):
    if len(A[0]) != len(B):
        raise PreconditionError(f"shape mismatch {shape(A)} x {shape(B)}")
    Bt = transpose(B)
    return tuple(tuple(_dot(r, c) for c in Bt) for r in A)


def matvec(A, x):
    if len(A[0]) != len(x):
        raise PreconditionError("dimension mismatch in matrix-vector product")
    return tuple(_dot(r, x) for r in A)


def _dot(a, b):
    it = iter(zip(a, b))
    x, y = next(it)
    s = x * y
    for x, y in it:
        s = s + x * y
    return s


def column(A, j):
    return tuple(r[j] for r in A)


def from_columns(cols):
    return transpose(tuple(tuple(c) for c in cols))


def map_entries(A, f):
    return tuple(tuple(f(x) for x in r) for r in A)


def scale_tol(A) -> float:
    m = max((abs(x) for r in A for x in r if is_inexact(x) or isinstance(x, (int, Fraction))),
            default=1.0)
    return FLOAT_TOL * max(float(m), 1.0)


def _fr(x):
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    return x


def _load(A):
    return [[_fr(x) for x in r] for r in A]


def _is_zero(x, tol):
    if tol is None:
        return x == 0
    return abs(x) <= tol


def _choose_pivot(M, col, start, tol):
    if tol is None:
        for i in range(start, len(M)):
            if M[i][col] != 0:
                return i
        return None
    best, arg = tol, None
    for i in range(start, len(M)):
        a = abs(M[i][col])
        if a > best:
            best, arg = a, i
    return arg


def rref(A):
    """Reduced row echelon form. Returns (rows, pivot_columns)."""
    M = _load(A)
    if not M:
        return (), ()
    tol = scale_tol(A) if mat_is_inexact(A) else None
    n_rows, n_cols = len(M), len(M[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        i = _choose_pivot(M, c, r, tol)
        if i is None:
            continue
        M[r], M[i] = M[i], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for k in range(n_rows):
            if k != r and not _is_zero(M[k][c], tol):
                f = M[k][c]
                M[k] = [a - f * b for a, b in zip(M[k], M[r])]
        if tol is not None:
            for k in range(n_rows):
                if k != r:
                    M[k][c] = M[k][c] * 0
        pivots.append(c)
        r += 1
    return tuple(tuple(row) for row in M[:r]), tuple(pivots)


def rank(A) -> int:
    return len(rref(A)[1])


def det(A):
    n = len(A)
    if n == 0:
        return 1
    M = _load(A)
    tol = scale_tol(A) if mat_is_inexact(A) else None
    d = one_like(M[0][0])
    for c in range(n):
        i = _choose_pivot(M, c, c, tol)
        if i is None:
            return zero_like(M[0][0])
        if i != c:
            M[c], M[i] = M[i], M[c]
            d = -d
        piv = M[c][c]
        d = d * piv
        for k in range(c + 1, n):
            if not _is_zero(M[k][c], tol):
                f = M[k][c] / piv
                M[k] = [a - f * b for a, b in zip(M[k], M[c])]
    return d


def inverse(A):
    n = len(A)
    if n == 0 or len(A[0]) != n:
        raise PreconditionError("inverse needs a square matrix")
    A = _load(A)
    if mat_is_inexact(A):
        return _inverse_float(A)
    one = one_like(A[0][0])
    aug = [list(r) + list(e) for r, e in zip(A, identity(n, one))]
    for c in range(n):
        i = _choose_pivot(aug, c, c, None)
        if i is None:
            raise SingularMatrixError("matrix is singular")
        aug[c], aug[i] = aug[i], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for k in range(n):
            if k != c and aug[k][c] != 0:
                f = aug[k][c]
                aug[k] = [a - f * b for a, b in zip(aug[k], aug[c])]
    return tuple(tuple(r[n:]) for r in aug)


def _inverse_float(A):
    """Gauss-Jordan with partial pivoting. An entry counts as zero when it is
    tiny relative to the magnitudes that were combined to produce it, so
    badly scaled but honestly invertible matrices are accepted."""
    n = len(A)
    M = [list(r) + [1.0 if i == j else 0.0 for j in range(n)] for i, r in enumerate(A)]
    mag = [[abs(x) for x in r] for r in M]
    for c in range(n):
        best, arg = 0.0, None
        for i in range(c, n):
            a = abs(M[i][c])
            if a > FLOAT_TOL * mag[i][c] and a > best:
                best, arg = a, i
        if arg is None:
            raise SingularMatrixError("matrix is singular")
        M[c], M[arg] = M[arg], M[c]
        mag[c], mag[arg] = mag[arg], mag[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        mag[c] = [x * abs(inv) for x in mag[c]]
        for k in range(n):
            f = M[k][c]
            if k != c and f != 0:
                M[k] = [a - f * b for a, b in zip(M[k], M[c])]
                mag[k] = [a + abs(f) * b for a, b in zip(mag[k], mag[c])]
    return tuple(tuple(r[n:]) for r in M)


def solve(A, b):
    """Solve A x = b for square invertible A."""
    return matvec(inverse(A), b)


def is_invertible(A) -> bool:
    try:
        inverse(A)
    except SingularMatrixError:
        return False
    return True


def mats_close(A, B, tol=1e-9) -> bool:
    if shape(A) != shape(B):
        return False
    scale = max([1.0] + [abs(x) for r in A for x in r])
    return all(abs(x - y) <= tol * scale for r, s in zip(A, B) for x, y in zip(r, s))


def normalize_projective(A):
    """Scale so the first nonzero entry (row-major) equals 1."""
    for r in A:
        for x in r:
            if x != 0:
                return map_entries(A, lambda y: y / x)
    raise SingularMatrixError("zero matrix has no projective class")


# --- subspaces and flags ------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    """A subspace of F^d, stored by the rows of its reduced echelon basis."""

    d: int
    basis: tuple

    @classmethod
    def span(cls, vectors: Iterable[Sequence], d: int | None = None) -> "Subspace":
        vecs = [tuple(v) for v in vectors]
        if d is None:
            if not vecs:
                raise PreconditionError("dimension needed for the zero subspace")
            d = len(vecs[0])
        if any(len(v) != d for v in vecs):
            raise PreconditionError("vectors of inconsistent length")
        if not vecs:
            return cls(d, ())
        rows, _ = rref(vecs)
        return cls(d, rows)

    @classmethod
    def coordinate(cls, k: int, d: int, one=Fraction(1)) -> "Subspace":
        """Span of the first k standard basis vectors."""
        return cls(d, tuple(identity(d, one)[:k]))

    @classmethod
    def whole(cls, d: int, one=Fraction(1)) -> "Subspace":
        return cls.coordinate(d, d, one)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self):
        out = []
        for r in self.basis:
            for j, x in enumerate(r):
                if x != 0:
                    out.append(j)
                    break
        return tuple(out)

    def contains(self, v) -> bool:
        if not self.basis:
            return all(x == 0 for x in v)
        return rank(self.basis + (tuple(v),)) == self.dim

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(w) for w in other.basis)

    def image(self, g) -> "Subspace":
        return Subspace.span([matvec(g, w) for w in self.basis], self.d)

    def coords(self, v):
        """Coordinates of v in the echelon basis (v must lie in the subspace)."""
        piv = self.pivots
        c = tuple(v[j] for j in piv)
        recon = tuple(sum((ci * w[k] for ci, w in zip(c, self.basis)), v[k] * 0)
                      for k in range(self.d))
        if any(not _close_or_eq(a, b) for a, b in zip(recon, v)):
            raise PreconditionError("vector does not lie in the subspace")
        return c

    def basis_matrix(self):
        """d x k matrix whose columns are the echelon basis."""
        return from_columns(self.basis)


def _close_or_eq(a, b):
    if is_inexact(a) or is_inexact(b):
        return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))
    return a == b


class Quotient:
    """Coordinates on A/B via a fixed complement: B's echelon basis is extended
    greedily by A's echelon basis vectors."""

    def __init__(self, A: Subspace, B: Subspace):
        if not A.contains_subspace(B):
            raise PreconditionError("quotient needs nested subspaces")
        if A.dim == B.dim:
            raise PreconditionError("quotient of equal subspaces is zero")
        self.A, self.B = A, B
        chosen = list(B.basis)
        comp = []
        for w in A.basis:
            if rank(tuple(chosen) + (w,)) > len(chosen):
                chosen.append(w)
                comp.append(w)
        self.complement = tuple(comp)
        self.full = tuple(B.basis) + self.complement
        self._full_cols = from_columns(self.full)

    @property
    def dim(self):
        return len(self.complement)

    def coords(self, x):
        """Complement coordinates of the class of x (x in A)."""
        full = self._solve(x)
        return full[self.B.dim:]

    def lift(self, c):
        z = c[0] * 0
        return tuple(sum((ci * w[k] for ci, w in zip(c, self.complement)), z)
                     for k in range(self.A.d))

    def _solve(self, x):
        k = len(self.full)
        M = self._full_cols
        rows, piv = rref(tuple(tuple(M[i]) + (x[i],) for i in range(len(x))))
        if k in piv:
            raise PreconditionError("vector does not lie in the numerator subspace")
        out = [x[0] * 0] * k
        for r, pc in zip(rows, piv):
            out[pc] = r[k]
        return tuple(out)

    def induced_map(self, g):
        """Matrix of the map induced on A/B by g (which must preserve A and B)."""
        cols = [self.coords(matvec(g, w)) for w in self.complement]
        return from_columns(cols)


def parse_parabolic_type(I, d: int) -> frozenset:
    I = frozenset(int(i) for i in I)
    if any(i < 1 or i > d - 1 for i in I):
        raise PreconditionError(f"parabolic type {sorted(I)} out of range for d={d}")
    return I


@dataclass(frozen=True)
class Flag:
    """Strictly increasing chain of proper nonzero subspaces; 0 and V implicit."""

    d: int
    steps: tuple = ()

    def __post_init__(self):
        prev = 0
        for i, W in enumerate(self.steps):
            if W.d != self.d:
                raise PreconditionError("flag step in the wrong ambient space")
            if not (prev < W.dim < self.d):
                raise PreconditionError("flag steps must be proper with strictly increasing dimension")
            if i and not W.contains_subspace(self.steps[i - 1]):
                raise PreconditionError("flag steps must be nested")
            prev = W.dim

    @classmethod
    def standard(cls, I, d: int, one=Fraction(1)) -> "Flag":
        I = parse_parabolic_type(I, d)
        return cls(d, tuple(Subspace.coordinate(k, d, one) for k in sorted(I)))

    @property
    def m(self) -> int:
        return len(self.steps)

    def chain(self, one=Fraction(1)):
        """V_{-1}=0, V_0, ..., V_m=V."""
        zero = Subspace(self.d, ())
        whole = Subspace.whole(self.d, one)
        return (zero,) + tuple(self.steps) + (whole,)

    @property
    def dims(self):
        return tuple(W.dim for W in self.steps)

    def parabolic_type(self) -> frozenset:
        return frozenset(self.dims)

    def graded_dims(self):
        c = (0,) + self.dims + (self.d,)
        return tuple(c[i + 1] - c[i] for i in range(len(c) - 1))

    def refines(self, other: "Flag") -> bool:
        """True when every step of ``other`` is a step of self."""
        return all(W in self.steps for W in other.steps)

    def image(self, g) -> "Flag":
        return Flag(self.d, tuple(W.image(g) for W in self.steps))

    def is_standard(self) -> bool:
        return all(W == Subspace.coordinate(W.dim, self.d, _one_of(W)) for W in self.steps)


def _one_of(W: Subspace):
    for r in W.basis:
        for x in r:
            if x != 0:
                return one_like(x)
    return Fraction(1)


def standard_parabolic(I, d: int, one=Fraction(1)) -> Flag:
    return Flag.standard(I, d, one)


def stabilizes(g, flag: Flag) -> bool:
    if not is_invertible(g):
        raise SingularMatrixError("stabilizes needs an invertible matrix")
    return all(all(W.contains(matvec(g, w)) for w in W.basis) for W in flag.steps)


def block_diag(blocks):
    blocks = [as_mat(b) for b in blocks]
    n = sum(len(b) for b in blocks)
    z = zero_like(blocks[0][0][0])
    out = [[z] * n for _ in range(n)]
    o = 0
    for b in blocks:
        k = len(b)
        for i in range(k):
            for j in range(k):
                out[o + i][o + j] = b[i][j]
        o += k
    return as_mat(out)


def submatrix(A, rows, cols):
    return tuple(tuple(A[i][j] for j in cols) for i in rows)
