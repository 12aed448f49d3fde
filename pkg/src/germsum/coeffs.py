"""Exact coefficient field: Gaussian rationals over ``gmpy2.mpq``.

Real coefficients are stored as bare ``mpq`` (fast path).  A
:class:`GaussRational` appears only when the imaginary part is nonzero, and
every arithmetic result is normalized back to ``mpq`` when it becomes real.
"""

from __future__ import annotations

import re
from fractions import Fraction

import mpmath
from gmpy2 import mpq

from germsum.errors import ParseError

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def _q(x) -> mpq:
    if isinstance(x, mpq):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, float):
        raise TypeError("floats are not exact coefficients; pass a Fraction or 'p/q' string")
    return mpq(x)


class GaussRational:
    """``re + i*im`` with exact rational parts.

    Use :func:`gauss` rather than the constructor when the result may be
    real; it returns a plain ``mpq`` in that case.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = _q(re)
        self.im = _q(im)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, GaussRational):
            return gauss(self.re + other.re, self.im + other.im)
        try:
            o = _q(other)
        except TypeError:
            return NotImplemented
        return GaussRational(self.re + o, self.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, GaussRational):
            return gauss(self.re - other.re, self.im - other.im)
        try:
            o = _q(other)
        except TypeError:
            return NotImplemented
        return GaussRational(self.re - o, self.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GaussRational):
            a, b, c, d = self.re, self.im, other.re, other.im
            return gauss(a * c - b * d, a * d + b * c)
        try:
            o = _q(other)
        except TypeError:
            return NotImplemented
        return gauss(self.re * o, self.im * o)

    __rmul__ = __mul__

    def conjugate(self):
        return GaussRational(self.re, -self.im)

    def norm2(self) -> mpq:
        return self.re * self.re + self.im * self.im

    def inverse(self):
        n = self.norm2()
        return GaussRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        if isinstance(other, GaussRational):
            return self * other.inverse()
        try:
            o = _q(other)
        except TypeError:
            return NotImplemented
        return gauss(self.re / o, self.im / o)

    def __rtruediv__(self, other):
        return _q(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out, base = mpq(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # comparisons --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, GaussRational):
            return self.re == other.re and self.im == other.im
        try:
            o = _q(other)
        except (TypeError, ValueError, ParseError):
            return NotImplemented
        return self.im == 0 and self.re == o

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __abs__(self) -> float:
        return abs(complex(self))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussRational({format_rational(self.re)!r}, {format_rational(self.im)!r})"

    def __str__(self):
        sign = "+" if self.im >= 0 else "-"
        return f"({self.re} {sign} {abs(self.im)}*I)"


I = GaussRational(0, 1)


def gauss(re, im=0):
    """Normalized coefficient: ``mpq`` when ``im == 0`` else :class:`GaussRational`."""
    im = _q(im)
    if im == 0:
        return _q(re)
    return GaussRational(re, im)


def coerce(x):
    """Turn ints, Fractions, 'p/q' strings, Python complex with exact parts, etc. into a coefficient."""
    if isinstance(x, (mpq, GaussRational)):
        return x
    if isinstance(x, complex):
        re_, im_ = Fraction(x.real), Fraction(x.imag)
        return gauss(re_, im_)
    return _q(x)


def re_im(c) -> tuple[mpq, mpq]:
    if isinstance(c, GaussRational):
        return c.re, c.im
    return _q(c), mpq(0)


def is_real(c) -> bool:
    return not isinstance(c, GaussRational)


def to_complex(c) -> complex:
    if isinstance(c, GaussRational):
        return complex(c)
    return complex(float(c))


def to_mp(c, ctx=mpmath.mp):
    """Exact coefficient to an mpmath number at the context's precision."""
    if isinstance(c, GaussRational):
        return ctx.mpc(_mpq_to_mpf(c.re, ctx), _mpq_to_mpf(c.im, ctx))
    return _mpq_to_mpf(_q(c), ctx)


def _mpq_to_mpf(q: mpq, ctx):
    return ctx.mpf(int(q.numerator)) / int(q.denominator)


def coeff_abs(c) -> float:
    if isinstance(c, GaussRational):
        return abs(complex(c))
    return abs(float(c))


def log_abs(c) -> float:
    """``log|c|`` without overflowing on huge rationals."""
    if isinstance(c, GaussRational):
        return float(mpmath.log(abs(to_mp(c))))
    q = _q(c)
    return float(mpmath.log(abs(int(q.numerator)))) - float(mpmath.log(int(q.denominator)))


def format_rational(q) -> str:
    """Byte-stable ``"p/q"`` rendering (the denominator is always present)."""
    q = _q(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(s: str) -> mpq:
    """Parse ``"p"`` or ``"p/q"``; decimals and exponents are rejected."""
    if not isinstance(s, str):
        raise ParseError(f"expected a rational string, got {type(s).__name__}")
    m = _RATIONAL_RE.match(s)
    if not m:
        raise ParseError(f"not a rational 'p/q': {s!r}")
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ParseError(f"zero denominator in {s!r}")
    return mpq(int(m.group(1)), den)


def parse_complex_rational(s: str):
    """Parse ``"a"``, ``"a/b"`` or ``"re,im"`` (both rational)."""
    parts = s.split(",")
    if len(parts) == 1:
        return parse_rational(parts[0])
    if len(parts) == 2:
        return gauss(parse_rational(parts[0]), parse_rational(parts[1]))
    raise ParseError(f"not a Gaussian rational: {s!r}")
