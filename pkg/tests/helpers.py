"""Random instances and independent oracles shared by the test modules."""
from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np

from normspace import linalg as la
from normspace.norms import Norm, hermitian_form
from normspace.scalars import Place, normalized_abs, random_scalar

PLACES = [Place.real(), Place.complex(), Place.padic(2), Place.padic(3), Place.padic(5),
          Place.laurent(2), Place.laurent(3, "1/T")]
PLACE_KINDS = [Place.real(), Place.complex(), Place.padic(3), Place.laurent(3)]
NONARCH = [p for p in PLACES if not p.is_archimedean]


def place_id(v: Place) -> str:
    return str(v)


def random_invertible(v: Place, d: int, rng: random.Random, spread: int = 2):
    while True:
        M = tuple(tuple(random_scalar(v, rng, spread) for _ in range(d)) for _ in range(d))
        if v.is_archimedean:
            if abs(np.linalg.det(np.array(M, dtype=complex))) > 0.05:
                return M
        elif la.det(M) != 0:
            return M


def random_weight(v: Place, rng: random.Random):
    if v.is_archimedean:
        return rng.uniform(0.5, 3.0)
    return Fraction(v.q) ** rng.randint(-2, 2)


def random_norm(v: Place, d: int, rng: random.Random) -> Norm:
    return Norm(v, random_invertible(v, d, rng), tuple(random_weight(v, rng) for _ in range(d)))


def random_unipotent(v: Place, d: int, rng: random.Random, spread: int = 2):
    return tuple(tuple(v.one() if i == j else (random_scalar(v, rng, spread) if j > i else v.zero())
                       for j in range(d)) for i in range(d))


def random_t(v: Place, n: int, rng: random.Random, zeros: bool = False):
    out = []
    for _ in range(n):
        if zeros and rng.random() < 0.3:
            out.append(0.0 if v.is_archimedean else Fraction(0))
        elif v.is_archimedean:
            out.append(rng.uniform(0.2, 3.0))
        else:
            out.append(Fraction(v.q) ** rng.randint(-2, 2))
    return tuple(out)


def random_subspace(v: Place, d: int, k: int, rng: random.Random) -> la.Subspace:
    while True:
        vecs = [tuple(random_scalar(v, rng, 1) for _ in range(d)) for _ in range(k)]
        if la.rank(vecs) == k:
            return la.Subspace.span(vecs, d)


def is_upper_triangular(M) -> bool:
    return all(M[i][j] == 0 for i in range(len(M)) for j in range(i))


# --- induced norm oracles --------------------------------------------------------------

def induced_inf_arch(mu: Norm, x, H) -> float:
    """min over h in span(H) of mu(x + h), by the exact least-squares minimizer."""
    Q = hermitian_form(mu)
    cplx = mu.place.kind == "complex"
    dt = complex if cplx else float
    xv = np.array(x, dtype=dt)
    if not H:
        val = (xv.conj() @ Q @ xv).real
    else:
        Hm = np.array(H, dtype=dt).T
        A = Hm.conj().T @ Q @ Hm
        c = -np.linalg.solve(A, Hm.conj().T @ Q @ xv)
        y = xv + Hm @ c
        val = (y.conj() @ Q @ y).real
    return float(val) if cplx else math.sqrt(max(val, 0.0))


def induced_inf_ultra(mu: Norm, x, H):
    """Exact min over h in span(H) of mu(x + h).

    In mu's adapted coordinates the objective is max_l r_l |a_l + <c, b_l>|.
    A minimizer can be taken where k of the affine forms with independent
    linear parts vanish, so it suffices to enumerate those vertices."""
    v = mu.place
    a = la.matvec(mu.inv, tuple(v.coerce(s) for s in x))
    if not H:
        return mu.eval_coords(a)
    k = len(H)
    B = [la.matvec(mu.inv, tuple(v.coerce(s) for s in h)) for h in H]
    d = mu.d
    rows = [tuple(B[j][l] for j in range(k)) for l in range(d)]
    best = None
    for subset in itertools.combinations(range(d), k):
        M = tuple(rows[l] for l in subset)
        if la.det(M) == 0:
            continue
        c = la.solve(M, tuple(-a[l] for l in subset))
        y = tuple(a[l] + sum(c[j] * rows[l][j] for j in range(k)) for l in range(d))
        val = mu.eval_coords(y)
        best = val if best is None or val < best else best
    return best


# --- half plane word search ----------------------------------------------------------------

_WORDS = None


def sl2_words(max_len: int = 12) -> np.ndarray:
    """Distinct elements (up to sign) of words of length <= max_len in S, T, T^-1."""
    global _WORDS
    if _WORDS is not None and _WORDS[0] == max_len:
        return _WORDS[1]
    gens = [((0, -1), (1, 0)), ((1, 1), (0, 1)), ((1, -1), (0, 1))]

    def key(m):
        (a, b), (c, d) = m
        if (a, b, c, d) < (-a, -b, -c, -d):
            a, b, c, d = -a, -b, -c, -d
        return (a, b, c, d)

    seen = {key(((1, 0), (0, 1)))}
    frontier = [((1, 0), (0, 1))]
    for _ in range(max_len):
        nxt = []
        for m in frontier:
            for g in gens:
                p = ((m[0][0] * g[0][0] + m[0][1] * g[1][0], m[0][0] * g[0][1] + m[0][1] * g[1][1]),
                     (m[1][0] * g[0][0] + m[1][1] * g[1][0], m[1][0] * g[0][1] + m[1][1] * g[1][1]))
                k = key(p)
                if k not in seen:
                    seen.add(k)
                    nxt.append(p)
        frontier = nxt
    arr = np.array(sorted(seen), dtype=float)
    _WORDS = (max_len, arr)
    return arr


def word_search_reduce(G, max_len: int = 12):
    """Gram matrices w^T G w over all words w, returning one in the classical
    fundamental domain (C >= A, |B| <= A/2) or None."""
    W = sl2_words(max_len)
    a, b, c, d = W[:, 0], W[:, 1], W[:, 2], W[:, 3]
    G = np.array(G, dtype=float)
    # w^T G w for w = [[a, b], [c, d]]
    A = a * a * G[0, 0] + 2 * a * c * G[0, 1] + c * c * G[1, 1]
    B = a * b * G[0, 0] + (a * d + b * c) * G[0, 1] + c * d * G[1, 1]
    C = b * b * G[0, 0] + 2 * b * d * G[0, 1] + d * d * G[1, 1]
    eps = 1e-12 * (A + C)
    ok = (C >= A - eps) & (np.abs(B) <= A / 2 + eps)
    idx = np.nonzero(ok)[0]
    if len(idx) == 0:
        return None
    i = idx[np.argmin(A[idx])]
    return np.array([[A[i], B[i]], [B[i], C[i]]])


def mirror_canonical(G) -> np.ndarray:
    G = np.array(G, dtype=float)
    return np.array([[G[0, 0], abs(G[0, 1])], [abs(G[0, 1]), G[1, 1]]])


def on_fd_boundary(G, tol=1e-7) -> bool:
    G = np.array(G, dtype=float)
    A, B, C = G[0, 0], G[0, 1], G[1, 1]
    return abs(abs(B) - A / 2) <= tol * A or abs(C - A) <= tol * A


def random_gram(d: int, rng: random.Random, exact: bool = False):
    while True:
        if exact:
            A = [[Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(d)] for _ in range(d)]
            if la.det(A) == 0:
                continue
            G = la.matmul(la.transpose(A), A)
            return tuple(tuple(x for x in r) for r in G)
        A = np.array([[rng.gauss(0, 1) for _ in range(d)] for _ in range(d)])
        if abs(np.linalg.det(A)) < 0.05:
            continue
        return tuple(tuple(float(x) for x in r) for r in A.T @ A)


def random_subspace_of(v: Place, W: la.Subspace, k: int, rng: random.Random) -> la.Subspace:
    """A random k-dimensional subspace of W."""
    if k == 0:
        return la.Subspace(W.d, ())
    while True:
        vecs = []
        for _ in range(k):
            c = [random_scalar(v, rng, 1) for _ in W.basis]
            vecs.append(tuple(sum((ci * b[i] for ci, b in zip(c, W.basis)), v.zero())
                              for i in range(W.d)))
        S = la.Subspace.span(vecs, W.d)
        if S.dim == k:
            return S
