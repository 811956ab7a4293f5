"""Exact arithmetic over Q and quadratic fields Q(sqrt(d)).

Rationals are plain :class:`fractions.Fraction`.  :class:`QuadExt` holds
``a + b*sqrt(d)`` with rational ``a`` and ``b``; internally it is kept as
an integer triple ``(p + q*sqrt(d)) / r`` with ``gcd(p, q, r) == 1`` which
is considerably faster than four Fractions.

A value with ``b == 0`` is radicand-neutral (stored with ``d == 1``) and
combines with any field.  Mixing two different irrational radicands is a
programming error and raises :class:`RadicandMismatch`.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence, Union

Rational = Union[int, Fraction]


class RadicandMismatch(ValueError):
    pass


def squarefree_split(k: int) -> tuple[int, int]:
    """Return ``(s, d)`` with ``k == s*s*d`` and ``d`` square-free."""
    if k < 0:
        raise ValueError("negative radicand")
    if k == 0:
        return 0, 1
    s, d, f = 1, k, 2
    while f * f <= d:
        while d % (f * f) == 0:
            d //= f * f
            s *= f
        f += 1
    return s, d


def _is_squarefree(d: int) -> bool:
    return d >= 2 and squarefree_split(d)[0] == 1


@total_ordering
class QuadExt:
    __slots__ = ("_p", "_q", "_r", "d", "_f")

    def __init__(self, a: Rational = 0, b: Rational = 0, d: int = 1):
        a = Fraction(a)
        b = Fraction(b)
        if b != 0 and not _is_squarefree(d):
            raise ValueError(f"radicand must be square-free and >= 2, got {d}")
        den = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
        self._set(a.numerator * (den // a.denominator),
                  b.numerator * (den // b.denominator), den, d)

    def _set(self, p: int, q: int, r: int, d: int) -> None:
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        if g > 1:
            p, q, r = p // g, q // g, r // g
        if q == 0:
            d = 1
        self._p, self._q, self._r, self.d = p, q, r, d
        self._f = None

    @classmethod
    def _raw(cls, p: int, q: int, r: int, d: int) -> QuadExt:
        obj = cls.__new__(cls)
        obj._set(p, q, r, d)
        return obj

    @classmethod
    def sqrt(cls, k: Rational) -> QuadExt:
        """Exact sqrt of a nonnegative rational, e.g. sqrt(8) -> 2*sqrt(2)."""
        k = Fraction(k)
        if k < 0:
            raise ValueError("sqrt of negative number")
        # sqrt(n/m) = sqrt(n*m)/m
        s, d = squarefree_split(k.numerator * k.denominator)
        if d == 1:
            return cls._raw(s, 0, k.denominator, 1)
        return cls._raw(0, s, k.denominator, d)

    # -- components ---------------------------------------------------------
    @property
    def a(self) -> Fraction:
        return Fraction(self._p, self._r)

    @property
    def b(self) -> Fraction:
        return Fraction(self._q, self._r)

    def is_rational(self) -> bool:
        return self._q == 0

    def __float__(self) -> float:
        if self._f is None:
            if self._q == 0:
                self._f = self._p / self._r
            else:
                self._f = (self._p + self._q * math.sqrt(self.d)) / self._r
        return self._f

    # -- coercion -----------------------------------------------------------
    def _coerce(self, other) -> QuadExt:
        if isinstance(other, QuadExt):
            return other
        if isinstance(other, int):
            return QuadExt._raw(other, 0, 1, 1)
        if isinstance(other, Fraction):
            return QuadExt._raw(other.numerator, 0, other.denominator, 1)
        return NotImplemented

    def _common_d(self, other: QuadExt) -> int:
        if self.d == other.d or other._q == 0:
            return self.d
        if self._q == 0:
            return other.d
        raise RadicandMismatch(f"cannot mix sqrt({self.d}) and sqrt({other.d})")

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = self._common_d(o)
        if self._r == o._r:
            return QuadExt._raw(self._p + o._p, self._q + o._q, self._r, d)
        return QuadExt._raw(self._p * o._r + o._p * self._r,
                            self._q * o._r + o._q * self._r, self._r * o._r, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt._raw(-self._p, -self._q, self._r, self.d)

    def __pos__(self):
        return self

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
        d = self._common_d(o)
        p1, q1, p2, q2 = self._p, self._q, o._p, o._q
        return QuadExt._raw(p1 * p2 + d * q1 * q2, p1 * q2 + q1 * p2, self._r * o._r, d)

    __rmul__ = __mul__

    def conjugate(self) -> QuadExt:
        return QuadExt._raw(self._p, -self._q, self._r, self.d)

    def norm(self) -> Fraction:
        """Field norm a^2 - d*b^2."""
        return Fraction(self._p * self._p - self.d * self._q * self._q, self._r * self._r)

    def inverse(self) -> QuadExt:
        n = self._p * self._p - self.d * self._q * self._q
        if n == 0:
            raise ZeroDivisionError("division by zero QuadExt")
        # 1/((p+q s)/r) = r (p - q s) / (p^2 - d q^2)
        return QuadExt._raw(self._r * self._p, -self._r * self._q, n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        self._common_d(o)
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- comparison ---------------------------------------------------------
    def sign(self) -> int:
        return quad_sign(self)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        if self._q == 0 and o._q == 0:
            return self._p == o._p and self._r == o._r
        return (self._p, self._q, self._r, self.d) == (o._p, o._q, o._r, o.d)

    def __lt__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() < 0

    def __hash__(self):
        if self._q == 0:
            return hash(Fraction(self._p, self._r))
        return hash((self._p, self._q, self._r, self.d))

    def __bool__(self):
        return self._p != 0 or self._q != 0

    # -- text ---------------------------------------------------------------
    def __str__(self) -> str:
        return format_exact(self)

    def __repr__(self) -> str:
        return f"QuadExt({format_exact(self)!r})"


def quad_sign(x: QuadExt) -> int:
    """Exact sign of a + b*sqrt(d) using integer comparisons only."""
    p, q = x._p, x._q  # r > 0 does not affect the sign
    sp = (p > 0) - (p < 0)
    sq = (q > 0) - (q < 0)
    if sq == 0:
        return sp
    if sp == 0 or sp == sq:
        return sq
    # opposite signs: compare p^2 with d*q^2
    lhs, rhs = p * p, x.d * q * q
    if lhs > rhs:
        return sp
    if lhs < rhs:
        return sq
    return 0


def as_quad(x) -> QuadExt:
    if isinstance(x, QuadExt):
        return x
    return QuadExt(Fraction(x))


# ---------------------------------------------------------------------------
# Text format: "p/q" and "p/q+r/s*sqrt(d)"

def _fmt_frac(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def format_exact(x) -> str:
    if isinstance(x, (int, Fraction)):
        return _fmt_frac(Fraction(x))
    if x.is_rational():
        return _fmt_frac(x.a)
    b = x.b
    sep = "-" if b < 0 else "+"
    return f"{_fmt_frac(x.a)}{sep}{_fmt_frac(abs(b))}*sqrt({x.d})"


_RAT = r"[+-]?\d+(?:/\d+)?"
_EXACT_RE = re.compile(
    rf"^\s*(?P<a>{_RAT})?\s*(?:(?P<sgn>[+-])?\s*(?P<b>\d+(?:/\d+)?)\s*\*\s*sqrt\(\s*(?P<d>\d+)\s*\))?\s*$"
)


def parse_exact(text: str) -> QuadExt:
    """Inverse of :func:`format_exact`.  Also accepts ``"1/2+0*sqrt(3)"``."""
    m = _EXACT_RE.match(text)
    if not m or (m.group("a") is None and m.group("b") is None):
        raise ValueError(f"malformed exact number: {text!r}")
    a = Fraction(m.group("a")) if m.group("a") is not None else Fraction(0)
    if m.group("b") is None:
        return QuadExt(a)
    if m.group("a") is not None and m.group("sgn") is None:
        raise ValueError(f"malformed exact number: {text!r}")
    b = Fraction(m.group("b"))
    if m.group("sgn") == "-":
        b = -b
    d = int(m.group("d"))
    if b == 0:
        return QuadExt(a)
    s, d0 = squarefree_split(d)
    if d0 == 1:
        return QuadExt(a + b * s)
    return QuadExt(a, b * s, d0)


# ---------------------------------------------------------------------------
# Dense exact matrices: tuples of row tuples of QuadExt.

ExactMatrix = tuple  # tuple[tuple[QuadExt, ...], ...]
Vector = tuple


def matrix(rows: Iterable[Iterable]) -> ExactMatrix:
    out = tuple(tuple(as_quad(v) for v in row) for row in rows)
    if not out or not out[0]:
        raise ValueError("empty matrix")
    if any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def identity(n: int) -> ExactMatrix:
    return matrix([[1 if i == j else 0 for j in range(n)] for i in range(n)])


def unit(n: int, i: int) -> Vector:
    return tuple(QuadExt(1 if k == i else 0) for k in range(n))


def shape(m: ExactMatrix) -> tuple[int, int]:
    return len(m), len(m[0])


def transpose(m: ExactMatrix) -> ExactMatrix:
    return tuple(zip(*m))


def mat_apply(m: ExactMatrix, v: Sequence) -> Vector:
    if len(m[0]) != len(v):
        raise ValueError(f"dimension mismatch: {shape(m)} @ {len(v)}")
    v = [as_quad(x) for x in v]
    return tuple(sum((a * x for a, x in zip(row, v)), QuadExt(0)) for row in m)


def mat_mul(m: ExactMatrix, n: ExactMatrix) -> ExactMatrix:
    if len(m[0]) != len(n):
        raise ValueError(f"dimension mismatch: {shape(m)} @ {shape(n)}")
    cols = transpose(n)
    return tuple(tuple(dot(row, c) for c in cols) for row in m)


def dot(u: Sequence, v: Sequence) -> QuadExt:
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    return sum((as_quad(a) * b for a, b in zip(u, v)), QuadExt(0))


def vec_add(u: Sequence, v: Sequence) -> Vector:
    return tuple(as_quad(a) + b for a, b in zip(u, v))


def mat_inverse(m: ExactMatrix) -> ExactMatrix:
    """Gauss-Jordan inverse; raises ZeroDivisionError if singular."""
    n, c = shape(m)
    if n != c:
        raise ValueError("inverse of non-square matrix")
    aug = [list(row) + list(unit(n, i)) for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col].inverse()
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def determinant(m: ExactMatrix) -> QuadExt:
    n, c = shape(m)
    if n != c:
        raise ValueError("determinant of non-square matrix")
    a = [list(r) for r in m]
    det = QuadExt(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return QuadExt(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det = det * a[col][col]
        inv = a[col][col].inverse()
        for r in range(col + 1, n):
            if a[r][col]:
                f = a[r][col] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det
