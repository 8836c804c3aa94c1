"""Exact scalar arithmetic: rationals, 2-adic valuation, Mobius and affine maps."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpq

Rational = type(mpq())


def Q(x, den=None) -> Rational:
    """Coerce ints, Fractions, mpq and "num/den" strings to an exact rational."""
    if den is not None:
        return mpq(x, den)
    if isinstance(x, Rational):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a fraction string instead")
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def parse_rational(s: str) -> Rational:
    s = s.strip()
    if "." in s or "e" in s.lower():
        raise ValueError(f"not an exact rational: {s!r}")
    if "/" in s:
        num, den = s.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator: {s!r}")
        return mpq(int(num), int(den))
    return mpq(int(s))


def fmt(x) -> str:
    """Canonical "num/den" string (denominator always written)."""
    x = Q(x)
    return f"{x.numerator}/{x.denominator}"


def to_fraction(x) -> Fraction:
    x = Q(x)
    return Fraction(int(x.numerator), int(x.denominator))


def nu2(b: int) -> int:
    """2-adic valuation of a positive integer."""
    b = int(b)
    if b <= 0:
        raise ValueError("nu2 needs a positive integer")
    return int(gmpy2.bit_scan1(b))


def is_dyadic(x) -> bool:
    d = int(Q(x).denominator)
    return d & (d - 1) == 0


@dataclass(frozen=True)
class Mobius:
    """x -> (a x + b) / (c x + d), scaled so the first nonzero coefficient is 1."""

    a: Rational
    b: Rational
    c: Rational
    d: Rational

    def __post_init__(self):
        a, b, c, d = (Q(v) for v in (self.a, self.b, self.c, self.d))
        if a * d - b * c == 0:
            raise ValueError("degenerate Mobius map")
        lead = next(v for v in (a, b, c, d) if v != 0)
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, v / lead)

    @classmethod
    def identity(cls) -> Mobius:
        return cls(1, 0, 0, 1)

    @classmethod
    def affine(cls, slope, intercept) -> Mobius:
        return cls(slope, intercept, 0, 1)

    def __call__(self, x) -> Rational:
        x = Q(x)
        den = self.c * x + self.d
        if den == 0:
            raise ZeroDivisionError(f"pole of {self} at {x}")
        return (self.a * x + self.b) / den

    def pole(self):
        return None if self.c == 0 else -self.d / self.c

    def compose(self, other: Mobius) -> Mobius:
        """self o other."""
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        return Mobius(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inverse(self) -> Mobius:
        return Mobius(self.d, -self.b, -self.c, self.a)

    def is_identity(self) -> bool:
        return self.b == 0 and self.c == 0 and self.a == self.d

    def is_involution(self) -> bool:
        return self.a + self.d == 0 and not self.is_identity()

    def __str__(self):
        return f"({self.a}x + {self.b})/({self.c}x + {self.d})"


@dataclass(frozen=True)
class AffineMap:
    """z -> slope z + intercept."""

    slope: Rational
    intercept: Rational

    def __post_init__(self):
        object.__setattr__(self, "slope", Q(self.slope))
        object.__setattr__(self, "intercept", Q(self.intercept))

    @classmethod
    def identity(cls) -> AffineMap:
        return cls(1, 0)

    def __call__(self, z) -> Rational:
        return self.slope * Q(z) + self.intercept

    def compose(self, other: AffineMap) -> AffineMap:
        return AffineMap(self.slope * other.slope, self.slope * other.intercept + self.intercept)

    def inverse(self) -> AffineMap:
        if self.slope == 0:
            raise ZeroDivisionError("constant affine map has no inverse")
        return AffineMap(1 / self.slope, -self.intercept / self.slope)
