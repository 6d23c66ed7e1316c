"""Norms and semi-norms given by a basis and a weight vector.

A norm on E^d is stored as a matrix whose columns are a basis (e'_i) together
with weights (r_i). Writing x = sum a_i e'_i, its value is

* real:            sqrt(sum r_i^2 |a_i|^2)
* complex:         sum r_i |a_i|        (|.| the normalized, i.e. squared, value)
* non-archimedean: max r_i |a_i|

With the squared absolute value the complex formula is a Hermitian form, so
complex norms and Hermitian forms are the same objects here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg as la
from .errors import NotANormError, PreconditionError
from .scalars import Place, normalized_abs

REL_TOL = 1e-9


def is_exact_value(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def close(a, b, tol: float = REL_TOL) -> bool:
    """Exact equality for exact values, relative tolerance otherwise."""
    if is_exact_value(a) and is_exact_value(b):
        return a == b
    a, b = float(a), float(b)
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300) or a == b


def leq(a, b, tol: float = REL_TOL) -> bool:
    if is_exact_value(a) and is_exact_value(b):
        return a <= b
    return float(a) <= float(b) * (1 + tol) + 1e-300


def _coerce_weight(v: Place, r):
    if isinstance(r, str):
        r = Fraction(r)
    if v.is_archimedean:
        return float(r)
    if isinstance(r, (int, Fraction)):
        return Fraction(r)
    return float(r)


@dataclass(frozen=True, eq=False)
class SemiNorm:
    place: Place
    basis: tuple
    weights: tuple
    _inv: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        v = self.place
        B = la.as_mat(la.map_entries(la.as_mat(self.basis), v.coerce))
        object.__setattr__(self, "basis", B)
        w = tuple(_coerce_weight(v, r) for r in self.weights)
        object.__setattr__(self, "weights", w)
        n, k = la.shape(B)
        if n != k or len(w) != n:
            raise PreconditionError("basis must be square and match the weight count")
        if any(r < 0 for r in w):
            raise PreconditionError("weights must be nonnegative")
        if not self._inv:
            self._inv.append(la.inverse(B))

    @classmethod
    def standard(cls, place: Place, d: int, weights=None):
        one = place.one()
        return cls(place, la.identity(d, one), tuple(weights) if weights else (1,) * d)

    @property
    def d(self) -> int:
        return len(self.weights)

    @property
    def inv(self):
        return self._inv[0]

    @property
    def exact(self) -> bool:
        return self.place.exact and all(is_exact_value(r) for r in self.weights)

    def coords(self, x):
        if len(x) != self.d:
            raise PreconditionError(f"vector of length {len(x)} for a norm on dimension {self.d}")
        x = tuple(self.place.coerce(a) for a in x)
        return la.matvec(self.inv, x)

    def __call__(self, x):
        return self.eval_coords(self.coords(x))

    def eval_coords(self, a):
        v = self.place
        if v.kind == "real":
            return math.sqrt(sum((r * abs(c)) ** 2 for r, c in zip(self.weights, a)))
        if v.kind == "complex":
            return sum(r * normalized_abs(c, v) for r, c in zip(self.weights, a))
        return max(r * normalized_abs(c, v) for r, c in zip(self.weights, a))

    def basis_vectors(self):
        return tuple(la.column(self.basis, j) for j in range(self.d))

    def with_weights(self, weights):
        return type(self)(self.place, self.basis, tuple(weights))

    def scaled(self, c):
        return type(self)(self.place, self.basis, tuple(c * r for r in self.weights))


class Norm(SemiNorm):
    def __post_init__(self):
        super().__post_init__()
        if any(r <= 0 for r in self.weights):
            raise NotANormError("norm weights must be positive")

    def __repr__(self):
        return f"Norm({self.place}, basis={self.basis}, weights={self.weights})"


def as_norm(mu: SemiNorm) -> Norm:
    if isinstance(mu, Norm):
        return mu
    if any(r <= 0 for r in mu.weights):
        raise NotANormError("semi-norm with a zero weight is not a norm")
    return Norm(mu.place, mu.basis, mu.weights)


def evaluate(mu: SemiNorm, x):
    return mu(x)


def dual(mu: SemiNorm) -> Norm:
    mu = as_norm(mu)
    return Norm(mu.place, la.transpose(mu.inv), tuple(1 / r for r in mu.weights))


def act(g, mu: SemiNorm) -> SemiNorm:
    v = mu.place
    g = la.map_entries(la.as_mat(g), v.coerce)
    if not la.is_invertible(g):
        from .errors import SingularMatrixError
        raise SingularMatrixError("acting matrix is singular")
    return type(mu)(v, la.matmul(g, mu.basis), mu.weights)


def hermitian_form(mu: SemiNorm) -> np.ndarray:
    """Q with mu(x)^2 = x^T Q x (real) or mu(x) = x^* Q x (complex)."""
    v = mu.place
    if not v.is_archimedean:
        raise PreconditionError("Gram forms exist only at archimedean places")
    inv = np.array(mu.inv, dtype=complex if v.kind == "complex" else float)
    r = np.array(mu.weights, dtype=float)
    D = np.diag(r ** 2 if v.kind == "real" else r)
    Q = inv.conj().T @ D @ inv
    return (Q + Q.conj().T) / 2


def _ldl(G):
    """G = U^* D U with U unit upper triangular; returns (U, D)."""
    k = G.shape[0]
    U = np.eye(k, dtype=G.dtype)
    D = np.zeros(k)
    for i in range(k):
        D[i] = (G[i, i] - sum(D[s] * abs(U[s, i]) ** 2 for s in range(i))).real
        if D[i] <= 0:
            raise NotANormError("restricted form is not positive definite")
        for j in range(i + 1, k):
            U[i, j] = (G[i, j] - sum(D[s] * np.conj(U[s, i]) * U[s, j] for s in range(i))) / D[i]
    return U, D


def restrict_to_columns(mu: SemiNorm, W) -> Norm:
    """Norm x -> mu(W x) on E^k, W a d x k matrix of independent columns.

    The result is an adapted presentation, in the coordinates of W's columns."""
    mu = as_norm(mu)
    v = mu.place
    W = la.map_entries(la.as_mat(W), v.coerce)
    n, k = la.shape(W)
    if k == 0:
        raise PreconditionError("cannot restrict to the zero subspace")
    if la.rank(W) != k:
        raise PreconditionError("restriction needs independent columns")
    if v.is_archimedean:
        Q = hermitian_form(mu)
        cplx = v.kind == "complex"
        Wn = np.array(W, dtype=complex if cplx else float)
        G = Wn.conj().T @ Q @ Wn
        U, D = _ldl(G)
        Uinv = np.linalg.inv(U)
        conv = complex if cplx else float
        basis = tuple(tuple(conv(Uinv[i, j]) for j in range(k)) for i in range(k))
        weights = tuple(float(math.sqrt(x)) if not cplx else float(x) for x in D)
        return Norm(v, basis, weights)
    # ultrametric: pivoted elimination in mu's diagonal coordinates
    cols = [list(la.matvec(mu.inv, la.column(W, j))) for j in range(k)]
    combos = [[(1 if i == j else 0) for i in range(k)] for j in range(k)]
    rs = mu.weights
    out_basis, out_weights = [], []
    remaining = list(range(k))
    while remaining:
        l = remaining.pop(0)
        u = cols[l]
        vals = [r * normalized_abs(c, v) for r, c in zip(rs, u)]
        best = max(vals)
        jp = vals.index(best)
        for m in remaining:
            f = cols[m][jp] / u[jp]
            if f != 0:
                cols[m] = [a - f * b for a, b in zip(cols[m], u)]
                combos[m] = [a - f * b for a, b in zip(combos[m], combos[l])]
        out_basis.append(combos[l])
        out_weights.append(best)
    return Norm(v, la.from_columns([[v.coerce(c) for c in col] for col in out_basis]),
                tuple(out_weights))


@dataclass(frozen=True)
class AdaptedBasis:
    vectors: tuple
    weights: tuple


def adapted_basis(mu: SemiNorm, W: la.Subspace) -> AdaptedBasis:
    """Ambient vectors (w_i) and weights (s_i) with mu(sum a_i w_i) given by the
    one-step formula in (w_i, s_i)."""
    if W.dim == 0:
        raise PreconditionError("adapted basis of the zero subspace")
    Wm = W.basis_matrix()
    nu = restrict_to_columns(mu, Wm)
    Wc = la.map_entries(Wm, mu.place.coerce)
    vecs = tuple(la.matvec(Wc, c) for c in nu.basis_vectors())
    return AdaptedBasis(vecs, nu.weights)


def restrict(mu: SemiNorm, W: la.Subspace) -> Norm:
    """mu restricted to W, in the coordinates of W's echelon basis."""
    return restrict_to_columns(mu, W.basis_matrix())


def induce_on_quotient_coords(mu: SemiNorm, full_cols, b: int) -> Norm:
    """Norm induced on span(full)/span(first b columns of full), in the
    coordinates of the remaining columns."""
    k = la.shape(full_cols)[1]
    if b >= k:
        raise PreconditionError("quotient by the whole subspace")
    mu1 = restrict_to_columns(mu, full_cols)
    if b == 0:
        return mu1
    one = mu.place.one()
    zero = one * 0
    sel = tuple(tuple(one if i == b + j else zero for j in range(k - b)) for i in range(k))
    nu_star = restrict_to_columns(dual(mu1), sel)
    return dual(nu_star)


def induce_subquotient(mu: SemiNorm, Hp: la.Subspace, Hpp: la.Subspace) -> Norm:
    """Norm induced on H'/H'' in the complement coordinates of ``Quotient``."""
    q = la.Quotient(Hp, Hpp)
    return induce_on_quotient_coords(mu, la.from_columns(q.full), Hpp.dim)


def abs_rel(mu: SemiNorm, e) -> object:
    """|mu : e| = |det h|^{-1} prod r_i where mu's basis is h applied to e."""
    mu = as_norm(mu)
    v = mu.place
    E = la.map_entries(la.as_mat(e), v.coerce)
    dE = la.det(E)
    if dE == 0:
        from .errors import SingularMatrixError
        raise SingularMatrixError("reference basis is singular")
    h_det = la.det(mu.basis) / dE
    prod = mu.weights[0] * 0 + 1
    for r in mu.weights:
        prod = prod * r
    return prod / normalized_abs(h_det, v)


def _check_same_space(a: SemiNorm, b: SemiNorm):
    if a.place != b.place:
        raise PreconditionError("norms live at different places")
    if a.d != b.d:
        raise PreconditionError("norms live on spaces of different dimension")


def class_eq(mu1: SemiNorm, mu2: SemiNorm, tol: float = REL_TOL) -> bool:
    """Do the norms differ by a positive constant?"""
    _check_same_space(mu1, mu2)
    mu1, mu2 = as_norm(mu1), as_norm(mu2)
    if mu1.place.is_archimedean:
        Q1, Q2 = hermitian_form(mu1), hermitian_form(mu2)
        c = np.trace(Q1).real / np.trace(Q2).real
        return bool(np.all(np.abs(Q1 - c * Q2) <= tol * np.max(np.abs(Q1))))
    b2 = mu2.basis_vectors()
    c = mu1(b2[0]) / mu2(b2[0])
    return (all(close(mu1(b), c * mu2(b), tol) for b in b2)
            and all(close(mu1(b), c * mu2(b), tol) for b in mu1.basis_vectors()))


def _sup_ratio_ultra(mu: SemiNorm, nu: SemiNorm):
    return max(mu(b) / nu(b) for b in nu.basis_vectors())


def _gen_eigs(Q1, Q2):
    L = np.linalg.cholesky(Q2)
    Li = np.linalg.inv(L)
    M = Li @ Q1 @ Li.conj().T
    return np.linalg.eigvalsh((M + M.conj().T) / 2)


def class_distance(mu: SemiNorm, nu: SemiNorm) -> float:
    """log(sup mu/nu * sup nu/mu); zero exactly on equal classes."""
    _check_same_space(mu, nu)
    mu, nu = as_norm(mu), as_norm(nu)
    if mu.place.is_archimedean:
        ev = _gen_eigs(hermitian_form(mu), hermitian_form(nu))
        lo, hi = float(ev.min()), float(ev.max())
        val = math.log(hi / lo)
        if mu.place.kind == "real":
            val /= 2
        return max(val, 0.0)
    a = _sup_ratio_ultra(mu, nu)
    b = _sup_ratio_ultra(nu, mu)
    return max(math.log(a) + math.log(b), 0.0)


def re_present(mu: SemiNorm) -> Norm:
    """Another presentation of the same norm, built by diagonalizing mu on a
    sheared copy of the standard basis."""
    d = mu.d
    one = mu.place.one()
    W = tuple(tuple(one if j in (i, i + 1) else one * 0 for j in range(d)) for i in range(d))
    W = la.transpose(W)
    nu = restrict_to_columns(mu, W)
    return Norm(mu.place, la.matmul(la.map_entries(W, mu.place.coerce), nu.basis), nu.weights)
