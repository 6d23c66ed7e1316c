"""Local-field scalars and their normalized absolute values.

Four place kinds are supported:

* ``real``    -- floats, ``|a|`` is the usual absolute value;
* ``complex`` -- Python complex numbers, ``|a|`` is the *square* of the usual
  absolute value;
* ``padic``   -- exact rationals (``fractions.Fraction``) inside Q_p,
  ``|a| = p**(-v_p(a))``;
* ``laurent`` -- exact rational functions over F_p (``RatFunc``) inside
  F_p((T)) or F_p((1/T)), ``|a| = p**(-ord(a))``.

Non-archimedean absolute values are returned as exact ``Fraction`` powers of p,
so multiplicativity and the ultrametric inequality can be asserted with ``==``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from flint import nmod_poly

from .errors import MalformedInputError, PreconditionError, UnsupportedPlaceError

INF = math.inf


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


# --- F_p(T) -------------------------------------------------------------------

def _low_order(poly) -> int:
    for i, c in enumerate(poly.coeffs()):
        if int(c):
            return i
    return INF


class RatFunc:
    """An element of F_p(T), kept as a reduced fraction with monic denominator.

    ``num`` and ``den`` are coefficient tuples, lowest degree first."""

    __slots__ = ("p", "_n", "_d")

    def __init__(self, p: int, num, den=(1,)):
        n = num if isinstance(num, nmod_poly) else nmod_poly([int(c) % p for c in num], p)
        d = den if isinstance(den, nmod_poly) else nmod_poly([int(c) % p for c in den], p)
        if d.is_zero():
            raise ZeroDivisionError("zero denominator")
        if n.is_zero():
            d = nmod_poly([1], p)
        else:
            g = n.gcd(d)
            if g.degree() > 0:
                n, d = n // g, d // g
            lead = int(d.coeffs()[-1])
            if lead != 1:
                inv = pow(lead, -1, p)
                n, d = n * inv, d * inv
        self.p = p
        self._n = n
        self._d = d

    @property
    def num(self) -> tuple:
        return tuple(int(c) for c in self._n.coeffs())

    @property
    def den(self) -> tuple:
        return tuple(int(c) for c in self._d.coeffs())

    @classmethod
    def T(cls, p: int) -> "RatFunc":
        return cls(p, (0, 1))

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            if other.p != self.p:
                raise PreconditionError("mixing rational functions over different F_p")
            return other
        if isinstance(other, int):
            return RatFunc(self.p, (other,))
        if isinstance(other, Fraction):
            if other.denominator % self.p == 0:
                raise PreconditionError(f"{other} has no image in F_{self.p}")
            return RatFunc(self.p, (other.numerator,), (other.denominator,))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self._d == o._d:
            return RatFunc(self.p, self._n + o._n, self._d)
        return RatFunc(self.p, self._n * o._d + o._n * self._d, self._d * o._d)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(self.p, -self._n, self._d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RatFunc(self.p, self._n * o._n, self._d * o._d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o._n.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(self.p, self._n * o._d, self._d * o._n)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, n: int):
        if n < 0:
            if self._n.is_zero():
                raise ZeroDivisionError("zero to a negative power")
            return RatFunc(self.p, self._d ** (-n), self._n ** (-n))
        return RatFunc(self.p, self._n ** n, self._d ** n)

    def __eq__(self, other):
        o = self._coerce(other) if not isinstance(other, float) else NotImplemented
        if o is NotImplemented:
            return False
        return self._n == o._n and self._d == o._d

    def __hash__(self):
        return hash((self.p, self.num, self.den))

    def __bool__(self):
        return not self._n.is_zero()

    def degree(self) -> int:
        """deg(num) - deg(den); -inf for zero."""
        if self._n.is_zero():
            return -INF
        return self._n.degree() - self._d.degree()

    def order_at_T(self):
        if self._n.is_zero():
            return INF
        return _low_order(self._n) - _low_order(self._d)

    def __repr__(self):
        return f"RatFunc(p={self.p}, num={list(self.num)}, den={list(self.den)})"


# --- places -----------------------------------------------------------------

_KINDS = ("real", "complex", "padic", "laurent")


@dataclass(frozen=True)
class Place:
    """A place kind together with its residue characteristic.

    For ``laurent`` places ``at`` selects the uniformizer: ``"T"`` (completion
    F_p((T))) or ``"1/T"`` (completion at infinity, F_p((1/T))).
    """

    kind: str
    p: int | None = None
    at: str = "T"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise PreconditionError(f"unknown place kind {self.kind!r}")
        if self.kind in ("padic", "laurent"):
            if self.p is None or not _is_prime(self.p):
                raise PreconditionError(f"{self.kind} place needs a prime p, got {self.p}")
        elif self.p is not None:
            raise PreconditionError("archimedean places carry no prime")
        if self.at not in ("T", "1/T"):
            raise PreconditionError(f"laurent place 'at' must be 'T' or '1/T', got {self.at!r}")

    @classmethod
    def real(cls):
        return cls("real")

    @classmethod
    def complex(cls):
        return cls("complex")

    @classmethod
    def padic(cls, p: int):
        return cls("padic", p)

    @classmethod
    def laurent(cls, p: int, at: str = "T"):
        return cls("laurent", p, at)

    @classmethod
    def parse(cls, text: str) -> "Place":
        """Parse ``real``, ``complex``, ``padic:<p>``, ``laurent:<p>[:1/T]``."""
        parts = text.strip().split(":")
        try:
            if parts[0] in ("real", "complex") and len(parts) == 1:
                return cls(parts[0])
            if parts[0] == "padic" and len(parts) == 2:
                return cls.padic(int(parts[1]))
            if parts[0] == "laurent" and len(parts) in (2, 3):
                return cls.laurent(int(parts[1]), parts[2] if len(parts) == 3 else "T")
        except ValueError as exc:
            raise MalformedInputError(f"bad place {text!r}: {exc}") from exc
        raise MalformedInputError(f"bad place {text!r}")

    def __str__(self):
        if self.kind == "padic":
            return f"padic:{self.p}"
        if self.kind == "laurent":
            return f"laurent:{self.p}" + (":1/T" if self.at == "1/T" else "")
        return self.kind

    @property
    def is_archimedean(self) -> bool:
        return self.kind in ("real", "complex")

    @property
    def exact(self) -> bool:
        return not self.is_archimedean

    @property
    def q(self) -> int:
        if self.is_archimedean:
            raise UnsupportedPlaceError("archimedean places have no residue field")
        return self.p

    # field elements

    def coerce(self, x):
        """Bring ``x`` (int, Fraction, float, complex, str, RatFunc) into this place."""
        if isinstance(x, str):
            x = parse_rational(x)
        if self.kind == "real":
            if isinstance(x, complex):
                if x.imag != 0:
                    raise PreconditionError("complex value at a real place")
                x = x.real
            return float(x)
        if self.kind == "complex":
            return complex(x)
        if self.kind == "padic":
            if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
                return Fraction(x)
            if isinstance(x, Rational):
                return Fraction(x.numerator, x.denominator)
            raise PreconditionError(f"p-adic scalars must be exact rationals, got {x!r}")
        if isinstance(x, RatFunc):
            if x.p != self.p:
                raise PreconditionError("rational function over the wrong prime")
            return x
        if isinstance(x, (int, Fraction)):
            return RatFunc(self.p, (0,)) + x
        raise PreconditionError(f"laurent scalars must be RatFunc or integers, got {x!r}")

    def zero(self):
        return self.coerce(0)

    def one(self):
        return self.coerce(1)

    def uniformizer(self):
        """The fixed uniformizer: p for Q_p, T or 1/T for F_p(T)."""
        if self.kind == "padic":
            return Fraction(self.p)
        if self.kind == "laurent":
            t = RatFunc.T(self.p)
            return t if self.at == "T" else RatFunc(self.p, (1,)) / t
        raise UnsupportedPlaceError("archimedean places have no uniformizer")

    def abs(self, a):
        return normalized_abs(a, self)

    def val(self, a):
        return valuation(a, self)


def valuation(a, v: Place):
    """Additive valuation v(a) at a non-archimedean place; v(0) = +inf."""
    if v.is_archimedean:
        raise UnsupportedPlaceError(f"valuation is undefined at the {v.kind} place")
    if v.kind == "padic":
        a = Fraction(a)
        if a == 0:
            return INF
        p = v.p
        n, d, k = a.numerator, a.denominator, 0
        while n % p == 0:
            n //= p
            k += 1
        while d % p == 0:
            d //= p
            k -= 1
        return k
    a = v.coerce(a)
    if not a:
        return INF
    if v.at == "T":
        return a.order_at_T()
    return -a.degree()


def normalized_abs(a, v: Place):
    """Normalized absolute value; exact ``Fraction`` at non-archimedean places."""
    if v.kind == "real":
        return abs(float(a))
    if v.kind == "complex":
        z = complex(a)
        return z.real * z.real + z.imag * z.imag
    k = valuation(a, v)
    if k == INF:
        return Fraction(0)
    return Fraction(v.p) ** (-k)


def usual_abs(a) -> float:
    """Plain |a| for float/complex values, used by pivoting and tolerances."""
    return abs(complex(a))


def is_exact_scalar(x) -> bool:
    return isinstance(x, (int, Fraction, RatFunc)) and not isinstance(x, bool)


def random_scalar(v: Place, rng: random.Random, spread: int = 3, allow_zero: bool = True):
    """A random scalar with absolute value within a few powers of the uniformizer."""
    while True:
        if v.kind == "real":
            x = rng.uniform(-1.0, 1.0) * 2.0 ** rng.randint(-spread, spread)
        elif v.kind == "complex":
            x = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * 2.0 ** rng.randint(-spread, spread)
        elif v.kind == "padic":
            num = rng.randint(-v.p ** 2, v.p ** 2) * v.p ** rng.randint(0, spread)
            den = rng.randint(1, v.p ** 2) * v.p ** rng.randint(0, spread)
            x = Fraction(num, den)
        else:
            deg = rng.randint(0, 2)
            num = [rng.randrange(v.p) for _ in range(deg + 1)]
            shift = rng.randint(-spread, spread)
            x = RatFunc(v.p, num)
            if rng.random() < 0.3:
                den = [rng.randrange(v.p) for _ in range(rng.randint(0, 2))] + [1]
                x = x / RatFunc(v.p, den)
            x = x * v.uniformizer() ** shift
        if allow_zero or x != 0:
            return x


# --- JSON encoding ----------------------------------------------------------

def parse_rational(s: str) -> Fraction:
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInputError(f"bad rational {s!r}") from exc


def encode_scalar(x):
    """JSON form: rationals as ``"num/den"``, complex as ``[re, im]``,
    rational functions as ``{"num": [...], "den": [...]}``, floats as numbers."""
    if isinstance(x, RatFunc):
        return {"num": list(x.num), "den": list(x.den)}
    if isinstance(x, bool):
        raise MalformedInputError("booleans are not scalars")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, float):
        return x
    raise MalformedInputError(f"cannot encode scalar {x!r}")


def decode_scalar(obj, v: Place):
    try:
        if isinstance(obj, dict):
            if v.kind != "laurent":
                raise MalformedInputError("rational-function scalar at a non-laurent place")
            return RatFunc(v.p, [int(c) for c in obj["num"]], [int(c) for c in obj.get("den", [1])])
        if isinstance(obj, list):
            if len(obj) != 2:
                raise MalformedInputError(f"complex scalar must be [re, im], got {obj!r}")
            return v.coerce(complex(float(obj[0]), float(obj[1])))
        if isinstance(obj, bool):
            raise MalformedInputError("booleans are not scalars")
        if isinstance(obj, (int, float, str)):
            if isinstance(obj, float) and v.exact:
                raise MalformedInputError("floats are not exact scalars; use \"num/den\"")
            return v.coerce(obj)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, MalformedInputError):
            raise
        raise MalformedInputError(f"bad scalar {obj!r}: {exc}") from exc
    raise MalformedInputError(f"bad scalar {obj!r}")
