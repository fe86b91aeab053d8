"""Exact rational scalars, vectors, norms and box projection.

Every quantity in this package is an exact rational in canonical
irreducible form (gcd(|num|, den) == 1, den >= 1).  We use the stdlib
``fractions.Fraction``, which maintains exactly that normal form, and
expose it under the name ``Rational``.  Squared l2 norms are used
instead of l2 norms so that comparisons like ``|v| <= eps`` can be
decided exactly as ``l2sq(v) <= eps**2``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction

Vec = tuple  # tuple of Rational


class ZeroDenominator(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def normalize(num: int, den: int) -> Rational:
    """Canonical irreducible fraction num/den; the sign lives on the numerator."""
    if den == 0:
        raise ZeroDenominator("denominator must be nonzero")
    return Fraction(num, den)


def parse_rational(text: str) -> Rational:
    """Parse ``<sign?><digits>`` or ``<sign?><digits>/<digits>``."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return normalize(int(num), int(den))
    return Fraction(int(text))


def format_rational(q: Rational) -> str:
    """Canonical text form; integers print without a denominator."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def vec(entries: Iterable) -> Vec:
    v = tuple(Fraction(e) for e in entries)
    if not v:
        raise ValueError("vectors must have at least one entry")
    return v


def vadd(a: Vec, b: Vec) -> Vec:
    _same_dim(a, b)
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Vec, b: Vec) -> Vec:
    _same_dim(a, b)
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a: Vec) -> Vec:
    c = Fraction(c)
    return tuple(c * x for x in a)


def dot(a: Vec, b: Vec) -> Rational:
    _same_dim(a, b)
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def norm(v: Vec, kind: str) -> Rational:
    """Exact norm; ``l2sq`` is the squared euclidean norm."""
    if kind == "l2sq":
        return sum((x * x for x in v), Fraction(0))
    if kind == "linf":
        return max(abs(x) for x in v)
    if kind == "l1":
        return sum((abs(x) for x in v), Fraction(0))
    raise ValueError(f"unknown norm kind {kind!r}")


class Box:
    """Axis-aligned box  {x : lo <= x <= hi}  with rational corners."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: Sequence, hi: Sequence):
        self.lo = vec(lo)
        self.hi = vec(hi)
        if len(self.lo) != len(self.hi):
            raise DimensionMismatch("lo/hi dimension mismatch")
        for a, b in zip(self.lo, self.hi):
            if a > b:
                raise ValueError("box requires lo_i <= hi_i")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def __contains__(self, x) -> bool:
        return len(x) == self.dim and all(
            a <= xi <= b for a, xi, b in zip(self.lo, x, self.hi)
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Box) and self.lo == other.lo and self.hi == other.hi

    def __repr__(self) -> str:
        return f"Box({self.lo}, {self.hi})"


def unit_box(n: int) -> Box:
    return Box([0] * n, [1] * n)


def project_box(x: Vec, b: Box) -> Vec:
    """Componentwise clamp of ``x`` onto ``b`` (the euclidean projection)."""
    if len(x) != b.dim:
        raise DimensionMismatch("point/box dimension mismatch")
    return tuple(min(hi, max(lo, xi)) for lo, xi, hi in zip(b.lo, x, b.hi))


def _same_dim(a: Vec, b: Vec) -> None:
    if len(a) != len(b):
        raise DimensionMismatch(f"dimension mismatch: {len(a)} vs {len(b)}")
