"""Points of the compactified spaces.

Graded norm classes of a ``BoundaryPoint`` are stored on the quotients
V_i/V_{i-1}, in the complement coordinates fixed by ``linalg.Quotient``. For a
flag spanned by leading standard vectors these are the coordinates of
e_{c(i-1)+1}, ..., e_{c(i)}.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import linalg as la
from .errors import PreconditionError
from .norms import Norm, class_eq
from .scalars import Place


def flag_ring_one(v: Place):
    """Scalar 'one' used for F-rational flags at place v."""
    return v.one() if v.kind == "laurent" else la.Fraction(1)


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    place: Place
    flag: la.Flag
    graded: tuple

    def __post_init__(self):
        object.__setattr__(self, "graded", tuple(self.graded))
        dims = self.flag.graded_dims()
        if len(self.graded) != len(dims):
            raise PreconditionError(
                f"{len(self.graded)} graded classes for a flag with {len(dims)} graded pieces")
        for mu, k in zip(self.graded, dims):
            if mu.d != k:
                raise PreconditionError("graded class on a piece of the wrong dimension")
            if mu.place != self.place:
                raise PreconditionError("graded class at the wrong place")

    @classmethod
    def interior(cls, mu: Norm) -> "BoundaryPoint":
        return cls(mu.place, la.Flag(mu.d), (mu,))

    @property
    def d(self) -> int:
        return self.flag.d

    @property
    def is_interior(self) -> bool:
        return self.flag.m == 0

    def chain(self):
        return self.flag.chain(flag_ring_one(self.place))

    def quotients(self):
        ch = self.chain()
        return tuple(la.Quotient(ch[i + 1], ch[i]) for i in range(len(ch) - 1))

    def parabolic_type(self) -> frozenset:
        return self.flag.parabolic_type()

    def same_as(self, other: "BoundaryPoint", tol: float = 1e-9) -> bool:
        if self.place != other.place or self.flag != other.flag:
            return False
        return all(class_eq(a, b, tol) for a, b in zip(self.graded, other.graded))


@dataclass(frozen=True, eq=False)
class FlatPoint:
    place: Place
    W: la.Subspace
    cls: Norm

    def __post_init__(self):
        if self.W.dim == 0:
            raise PreconditionError("flat points need a nonzero subspace")
        if self.cls.d != self.W.dim:
            raise PreconditionError("class dimension does not match the subspace")

    def same_as(self, other: "FlatPoint", tol: float = 1e-9) -> bool:
        return (self.place == other.place and self.W == other.W
                and class_eq(self.cls, other.cls, tol))


@dataclass(frozen=True, eq=False)
class SharpPoint:
    """A boundary point with a splitting s; the columns of s for graded piece i
    lie in V_i and reduce to the complement basis of V_i/V_{i-1}."""

    point: BoundaryPoint
    splitting: tuple

    def __post_init__(self):
        s = la.as_mat(self.splitting)
        object.__setattr__(self, "splitting", s)
        if la.shape(s) != (self.point.d, self.point.d):
            raise PreconditionError("splitting must be a d x d matrix")
        col = 0
        for q in self.point.quotients():
            for j in range(q.dim):
                c = la.column(s, col + j)
                coords = q.coords(c)
                target = tuple(1 if k == j else 0 for k in range(q.dim))
                if any(not _near(a, b) for a, b in zip(coords, target)):
                    raise PreconditionError("splitting does not lift the graded bases")
            col += q.dim

    def same_as(self, other: "SharpPoint", tol: float = 1e-9) -> bool:
        if not self.point.same_as(other.point, tol):
            return False
        if la.mat_is_inexact(self.splitting) or la.mat_is_inexact(other.splitting):
            return la.mats_close(self.splitting, other.splitting, tol)
        return self.splitting == other.splitting


def _near(a, b):
    if la.is_inexact(a) or la.is_inexact(b):
        return abs(a - b) <= 1e-9
    return a == b
