"""Exact number helpers: rational powers, quadratic surds, dyadic rounding.

Everything here works on Python integers and :class:`fractions.Fraction`;
floats only appear in ``__float__`` conversions.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

import gmpy2

Rational = Union[int, Fraction]


def as_fraction(x: Rational | str | float) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction.

    Floats are accepted and converted exactly (a float is a dyadic rational).
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, (int, float)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational")


def fmt_fraction(x: Fraction | int) -> str:
    """Serialize a rational as ``num/den`` (always with a slash)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def iroot_floor(x: int, k: int) -> int:
    """floor(x ** (1/k)) for a non-negative integer x."""
    if x < 0:
        raise ValueError("negative radicand")
    if k == 1:
        return x
    if k == 2:
        return math.isqrt(x)
    return int(gmpy2.iroot(x, k)[0])


def frac_floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def frac_ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def dyadic_floor(x: Fraction, bits: int) -> Fraction:
    """Largest m / 2**bits that is <= x."""
    return Fraction(frac_floor(x * (1 << bits)), 1 << bits)


def dyadic_ceil(x: Fraction, bits: int) -> Fraction:
    return Fraction(frac_ceil(x * (1 << bits)), 1 << bits)


def _rel_shift(x: Fraction, bits: int) -> int:
    return bits - x.numerator.bit_length() + x.denominator.bit_length()


def rel_floor(x: Fraction, bits: int) -> Fraction:
    """A dyadic <= x agreeing with x to about ``bits`` significant bits; cheap for huge x > 0."""
    k = _rel_shift(x, bits)
    if k >= 0:
        return Fraction((x.numerator << k) // x.denominator, 1 << k)
    return Fraction(x.numerator // (x.denominator << -k) << -k)


def rel_ceil(x: Fraction, bits: int) -> Fraction:
    k = _rel_shift(x, bits)
    if k >= 0:
        return Fraction(-((-x.numerator << k) // x.denominator), 1 << k)
    return Fraction(-(-x.numerator // (x.denominator << -k)) << -k)


def _dyadic_parts(x: Fraction) -> tuple[int, int]:
    """(m, e) with x = m * 2**e; x must be dyadic."""
    n, d = x.numerator, x.denominator
    if d & (d - 1):
        raise ValueError("not a dyadic rational")
    if d > 1:
        return n, 1 - d.bit_length()
    if n == 0:
        return 0, 0
    tz = (n & -n).bit_length() - 1
    return n >> tz, tz


def dyadic_mul(x: Fraction, y: Fraction) -> Fraction:
    """Exact product of two dyadic rationals without big gcds."""
    (m1, e1), (m2, e2) = _dyadic_parts(x), _dyadic_parts(y)
    m, e = m1 * m2, e1 + e2
    return Fraction(m << e) if e >= 0 else Fraction(m, 1 << -e)


def log_of(x: Fraction | int) -> float:
    """Natural log of a positive rational of any size."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("log of non-positive number")
    return math.log(x.numerator) - math.log(x.denominator)


class Root:
    """The positive real ``radicand ** (1/degree)`` for a rational radicand >= 0.

    Products, integer powers and comparisons with rationals are exact.
    """

    __slots__ = ("radicand", "degree")

    def __init__(self, radicand: Rational, degree: int = 1):
        radicand = Fraction(radicand)
        if radicand < 0:
            raise ValueError("Root needs a non-negative radicand")
        if degree < 1:
            raise ValueError("degree must be >= 1")
        self.radicand = radicand
        self.degree = degree
        self._reduce()

    def _reduce(self) -> None:
        # collapse x**(1/k) to a lower degree when the radicand is a perfect power
        k = self.degree
        if k == 1 or self.radicand == 0:
            if self.radicand == 0:
                self.degree = 1
            return
        num, den = self.radicand.numerator, self.radicand.denominator
        for f in _prime_factors(k):
            while k % f == 0:
                rn, en = gmpy2.iroot(num, f)
                rd, ed = gmpy2.iroot(den, f)
                if not (en and ed):
                    break
                num, den, k = int(rn), int(rd), k // f
        self.radicand = Fraction(num, den)
        self.degree = k

    @classmethod
    def power(cls, base: Rational, exponent: Rational) -> "Root":
        """base ** exponent for rational base >= 0 and rational exponent."""
        base = Fraction(base)
        exponent = Fraction(exponent)
        u, v = exponent.numerator, exponent.denominator
        if base == 0:
            if exponent <= 0:
                raise ZeroDivisionError("0 ** non-positive exponent")
            return cls(0)
        if u < 0:
            base, u = 1 / base, -u
        return cls(base ** u, v)

    # --- exactness -------------------------------------------------------
    def exact(self) -> Fraction | None:
        return self.radicand if self.degree == 1 else None

    def is_rational(self) -> bool:
        return self.degree == 1

    # --- arithmetic ------------------------------------------------------
    def __mul__(self, other: "Root | Rational") -> "Root":
        if isinstance(other, Root):
            k = self.degree * other.degree // math.gcd(self.degree, other.degree)
            rad = self.radicand ** (k // self.degree) * other.radicand ** (k // other.degree)
            return Root(rad, k)
        other = Fraction(other)
        if other < 0:
            raise ValueError("Root only multiplies non-negative rationals")
        return Root(self.radicand * other ** self.degree, self.degree)

    __rmul__ = __mul__

    def __truediv__(self, other: "Root | Rational") -> "Root":
        if isinstance(other, Root):
            return self * Root(1 / other.radicand, other.degree)
        return self * (1 / Fraction(other))

    def __pow__(self, e: int) -> "Root":
        if e < 0:
            return Root(1 / self.radicand ** (-e), self.degree)
        return Root(self.radicand ** e, self.degree)

    # --- comparisons against rationals and other roots --------------------
    def _cmp(self, other: "Root | Rational") -> int:
        if isinstance(other, Root):
            k = self.degree * other.degree // math.gcd(self.degree, other.degree)
            a = self.radicand ** (k // self.degree)
            b = other.radicand ** (k // other.degree)
        else:
            other = Fraction(other)
            if other < 0:
                return 1
            a, b = self.radicand, other ** self.degree
        return (a > b) - (a < b)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if not isinstance(other, (Root, int, Fraction)):
            return NotImplemented
        return self._cmp(other) == 0

    def __hash__(self):
        return hash((self.radicand, self.degree))

    # --- rounding --------------------------------------------------------
    def floor(self) -> int:
        return iroot_floor(frac_floor(self.radicand), self.degree)

    def ceil(self) -> int:
        f = self.floor()
        return f if Fraction(f) ** self.degree == self.radicand else f + 1

    def bounds(self, bits: int = 64) -> tuple[Fraction, Fraction]:
        """Dyadic enclosure lo <= value <= hi; lo == hi when the value is rational."""
        if self.degree == 1:
            return self.radicand, self.radicand
        scaled = self.radicand * (1 << (bits * self.degree))
        m = iroot_floor(frac_floor(scaled), self.degree)
        return Fraction(m, 1 << bits), Fraction(m + 1, 1 << bits)

    def log(self) -> float:
        return log_of(self.radicand) / self.degree

    def __float__(self) -> float:
        if self.radicand == 0:
            return 0.0
        return math.exp(self.log())

    def __repr__(self) -> str:
        if self.degree == 1:
            return f"Root({self.radicand})"
        return f"Root({self.radicand}, {self.degree})"


def _prime_factors(k: int) -> list[int]:
    out, f = [], 2
    while f * f <= k:
        if k % f == 0:
            out.append(f)
            while k % f == 0:
                k //= f
        f += 1
    if k > 1:
        out.append(k)
    return out


class QuadraticSurd:
    """The real number (a + b*sqrt(D)) / c with integers a, b, c (c > 0).

    D is a fixed non-square positive integer; arithmetic between surds
    requires matching D.
    """

    __slots__ = ("a", "b", "c", "D")

    def __init__(self, a: int, b: int, c: int, D: int):
        if c == 0:
            raise ZeroDivisionError("zero denominator")
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        self.a, self.b, self.c, self.D = a, b, c, D

    @classmethod
    def from_rational(cls, x: Rational, D: int) -> "QuadraticSurd":
        x = Fraction(x)
        return cls(x.numerator, 0, x.denominator, D)

    def _coerce(self, other) -> "QuadraticSurd":
        if isinstance(other, QuadraticSurd):
            if other.D != self.D:
                raise ValueError("surds with different radicands")
            return other
        return QuadraticSurd.from_rational(other, self.D)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadraticSurd(self.a * o.c + o.a * self.c, self.b * o.c + o.b * self.c, self.c * o.c, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.a, -self.b, self.c, self.D)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, QuadraticSurd):
            o = self._coerce(other)
            return QuadraticSurd(
                self.a * o.a + self.b * o.b * self.D,
                self.a * o.b + self.b * o.a,
                self.c * o.c,
                self.D,
            )
        x = Fraction(other)
        return QuadraticSurd(self.a * x.numerator, self.b * x.numerator, self.c * x.denominator, self.D)

    __rmul__ = __mul__

    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0 or (a > 0) == (b > 0):
            return 1 if (a > 0 or (a == 0 and b > 0)) else -1
        # opposite signs: compare a^2 with b^2 D
        lhs, rhs = a * a, b * b * self.D
        if a > 0:
            return 1 if lhs > rhs else -1
        return 1 if rhs > lhs else -1

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if not isinstance(other, (QuadraticSurd, int, Fraction)):
            return NotImplemented
        return self._cmp(other) == 0

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.D))

    def floor(self) -> int:
        r = math.isqrt(self.b * self.b * self.D)
        if self.b >= 0:
            top = self.a + r
        else:
            top = self.a - (r if r * r == self.b * self.b * self.D else r + 1)
        return top // self.c

    def round_nearest(self) -> int:
        return (self + Fraction(1, 2)).floor()

    def __float__(self) -> float:
        # 80 extra bits keeps the quotient correctly rounded in practice
        scale = 1 << 160
        r = math.isqrt(self.b * self.b * self.D * scale * scale)
        top = self.a * scale + (r if self.b >= 0 else -r)
        return top / (self.c * scale)

    def __repr__(self) -> str:
        return f"({self.a} + {self.b}*sqrt({self.D}))/{self.c}"
