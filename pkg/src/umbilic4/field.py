"""Exact arithmetic in Q(sqrt2, sqrt5)

Elements are a + b*sqrt2 + c*sqrt5 + d*sqrt10 with rational a, b, c, d.
This field holds every entry of the polyhedral SO(4) groups: rationals,
1/sqrt2 and the golden ratio tau = (1 + sqrt5)/2.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from numbers import Rational

from .errors import ValidationError

_ROOTS = (1.0, math.sqrt(2.0), math.sqrt(5.0), math.sqrt(10.0))
_NAMES = ("", "sqrt2", "sqrt5", "sqrt10")
_TERM = re.compile(r"([+-]?)\s*(\d+(?:/\d+)?)?\s*\*?\s*(sqrt(?:10|2|5))?")


def _sign_q2(u: Fraction, v: Fraction) -> int:
    """Exact sign of u + v*sqrt2."""
    su = (u > 0) - (u < 0)
    sv = (v > 0) - (v < 0)
    if su == 0 or sv == 0 or su == sv:
        return su or sv
    if u * u > 2 * v * v:
        return su
    return sv


@total_ordering
class AlgebraicScalar:
    """Exact element of Q(sqrt2, sqrt5)."""

    __slots__ = ("_c", "_hash")

    def __init__(self, a=0, b=0, c=0, d=0) -> None:
        self._c = (Fraction(a), Fraction(b), Fraction(c), Fraction(d))
        self._hash = None

    @classmethod
    def _raw(cls, coeffs: tuple[Fraction, Fraction, Fraction, Fraction]) -> AlgebraicScalar:
        obj = cls.__new__(cls)
        obj._c = coeffs
        obj._hash = None
        return obj

    @classmethod
    def from_rational(cls, x: int | Fraction) -> AlgebraicScalar:
        return cls(x)

    @classmethod
    def sqrt2(cls) -> AlgebraicScalar:
        return cls(0, 1)

    @classmethod
    def sqrt5(cls) -> AlgebraicScalar:
        return cls(0, 0, 1)

    @classmethod
    def tau(cls) -> AlgebraicScalar:
        """Golden ratio (1 + sqrt5)/2."""
        return cls(Fraction(1, 2), 0, Fraction(1, 2))

    @classmethod
    def coerce(cls, x) -> AlgebraicScalar:
        if isinstance(x, AlgebraicScalar):
            return x
        if isinstance(x, (int, Rational)):
            return cls(x)
        raise ValidationError(f"Cannot use {x!r} as an exact scalar")

    @classmethod
    def parse(cls, text: str) -> AlgebraicScalar:
        """Parse the canonical string form, e.g. "1/2+1/2*sqrt5".

        Raises:
            ValidationError: If the text is not a sum of rational multiples of
                1, sqrt2, sqrt5, sqrt10
        """
        s = text.replace(" ", "")
        if not s:
            raise ValidationError("Empty scalar string")
        coeffs = [Fraction(0)] * 4
        pos = 0
        while pos < len(s):
            m = _TERM.match(s, pos)
            if m is None or m.end() == pos or (m.group(2) is None and m.group(3) is None):
                raise ValidationError(f"Cannot parse exact scalar: {text!r}")
            if pos > 0 and not m.group(1):
                raise ValidationError(f"Missing sign between terms: {text!r}")
            sign = -1 if m.group(1) == "-" else 1
            value = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            slot = _NAMES.index(m.group(3)) if m.group(3) else 0
            coeffs[slot] += sign * value
            pos = m.end()
        return cls(*coeffs)

    @property
    def coeffs(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return self._c

    def is_rational(self) -> bool:
        return not (self._c[1] or self._c[2] or self._c[3])

    def __repr__(self) -> str:
        return f"AlgebraicScalar({str(self)!r})"

    def __str__(self) -> str:
        parts = []
        for coef, name in zip(self._c, _NAMES):
            if coef == 0:
                continue
            mag = abs(coef)
            sign = "-" if coef < 0 else "+"
            if name and mag == 1:
                body = name
            elif name:
                body = f"{mag}*{name}"
            else:
                body = f"{mag}"
            parts.append(f"{sign}{body}")
        if not parts:
            return "0"
        out = "".join(parts)
        return out[1:] if out.startswith("+") else out

    def __float__(self) -> float:
        return sum(float(c) * r for c, r in zip(self._c, _ROOTS))

    def __bool__(self) -> bool:
        return any(self._c)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._c) if not self.is_rational() else hash(self._c[0])
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, AlgebraicScalar):
            return self._c == other._c
        if isinstance(other, (int, Rational)):
            return self.is_rational() and self._c[0] == other
        return NotImplemented

    def __lt__(self, other) -> bool:
        if isinstance(other, float):
            return float(self) < other
        try:
            return (self - AlgebraicScalar.coerce(other)).sign() < 0
        except ValidationError:
            return NotImplemented

    def sign(self) -> int:
        """Exact sign in {-1, 0, 1}."""
        a, b, c, d = self._c
        sp = _sign_q2(a, b)
        sq = _sign_q2(c, d)
        if sq == 0 or sp == sq:
            return sp or sq
        if sp == 0:
            return sq
        # p + sqrt5*q with opposite signs: compare p^2 and 5q^2 in Q(sqrt2)
        diff = _sign_q2(a * a + 2 * b * b - 5 * c * c - 10 * d * d, 2 * a * b - 10 * c * d)
        return sp if diff > 0 else sq

    def __neg__(self) -> AlgebraicScalar:
        a, b, c, d = self._c
        return AlgebraicScalar._raw((-a, -b, -c, -d))

    def __abs__(self) -> AlgebraicScalar:
        return -self if self.sign() < 0 else self

    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        if not isinstance(other, AlgebraicScalar):
            if not isinstance(other, (int, Rational)):
                return NotImplemented
            other = Fraction(other)
            a, b, c, d = self._c
            return AlgebraicScalar._raw((a + other, b, c, d))
        return AlgebraicScalar._raw(tuple(x + y for x, y in zip(self._c, other._c)))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, float):
            return float(self) - other
        if not isinstance(other, (AlgebraicScalar, int, Rational)):
            return NotImplemented
        return self + (-AlgebraicScalar.coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        if not isinstance(other, AlgebraicScalar):
            if not isinstance(other, (int, Rational)):
                return NotImplemented
            other = Fraction(other)
            return AlgebraicScalar._raw(tuple(x * other for x in self._c))
        a, b, c, d = self._c
        e, f, g, h = other._c
        return AlgebraicScalar._raw((
            a * e + 2 * b * f + 5 * c * g + 10 * d * h,
            a * f + b * e + 5 * c * h + 5 * d * g,
            a * g + c * e + 2 * b * h + 2 * d * f,
            a * h + d * e + b * g + c * f,
        ))

    __rmul__ = __mul__

    def conjugate_sqrt2(self) -> AlgebraicScalar:
        a, b, c, d = self._c
        return AlgebraicScalar._raw((a, -b, c, -d))

    def conjugate_sqrt5(self) -> AlgebraicScalar:
        """Field automorphism sqrt5 -> -sqrt5."""
        a, b, c, d = self._c
        return AlgebraicScalar._raw((a, b, -c, -d))

    def norm(self) -> Fraction:
        """Product of the four Galois conjugates (rational)."""
        prod = self * self.conjugate_sqrt2() * self.conjugate_sqrt5() * (
            self.conjugate_sqrt2().conjugate_sqrt5()
        )
        assert prod.is_rational()
        return prod._c[0]

    def inverse(self) -> AlgebraicScalar:
        if not self:
            raise ZeroDivisionError("inverse of zero")
        s2 = self.conjugate_sqrt2()
        s5 = self.conjugate_sqrt5()
        others = s2 * s5 * s2.conjugate_sqrt5()
        n = (self * others)._c[0]
        return others * (1 / n)

    def __truediv__(self, other):
        if isinstance(other, float):
            return float(self) / other
        if isinstance(other, (int, Rational)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / Fraction(other))
        if isinstance(other, AlgebraicScalar):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, float):
            return other / float(self)
        return AlgebraicScalar.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> AlgebraicScalar:
        if n < 0:
            return self.inverse() ** (-n)
        result = AlgebraicScalar(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result


ZERO = AlgebraicScalar(0)
ONE = AlgebraicScalar(1)


def is_exact(x) -> bool:
    return isinstance(x, (AlgebraicScalar, int, Rational)) and not isinstance(x, bool)


def to_exact(x) -> AlgebraicScalar:
    return AlgebraicScalar.coerce(x)


def scalar_to_json(x) -> str | float:
    """Exact scalars as canonical strings, everything else as float."""
    if isinstance(x, AlgebraicScalar):
        return str(x)
    if isinstance(x, (int, Rational)):
        return str(AlgebraicScalar(x))
    return float(x)


def scalar_from_json(x) -> AlgebraicScalar | float:
    if isinstance(x, str):
        return AlgebraicScalar.parse(x)
    return float(x)
