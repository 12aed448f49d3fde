"""Sparse truncated multivariate power series with exact coefficients.

A :class:`MultiSeries` in ``d`` variables stores the coefficients of all
monomials of total degree ``<= cap``; everything above ``cap`` is unknown.
Exponents are tuples of naturals, axes are 1-based in the public API
(``variable(d, N, 1)`` is ``x1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import mpmath
from gmpy2 import mpq

from germsum import kernels
from germsum.coeffs import GaussRational, coerce, format_rational, re_im, to_mp
from germsum.errors import (
    CertificationError,
    DimensionError,
    DivisibilityError,
    GermsumError,
    NonUnitError,
)

Exponent = tuple


# exponent order tests -------------------------------------------------------
def exp_leq(a: Sequence[int], b: Sequence[int]) -> bool:
    """Componentwise ``a <= b``."""
    return all(x <= y for x, y in zip(a, b))


def exp_lt(a: Sequence[int], b: Sequence[int]) -> bool:
    """Strict in every component: ``a_j < b_j`` for all ``j``."""
    return all(x < y for x, y in zip(a, b))


def exp_not_leq(a: Sequence[int], b: Sequence[int]) -> bool:
    """``a`` is not ``<= b``, i.e. ``a_j > b_j`` for some ``j``."""
    return any(x > y for x, y in zip(a, b))


def _check_exp(e, dim: int) -> tuple:
    e = tuple(int(v) for v in e)
    if len(e) != dim:
        raise DimensionError(f"exponent {e} has length {len(e)}, expected {dim}")
    if any(v < 0 for v in e):
        raise ValueError(f"negative exponent {e}")
    return e


class MultiSeries:
    """Immutable truncated power series.

    Parameters
    ----------
    dim : int
        Number of variables ``d >= 1``.
    cap : int
        Total-degree truncation ``N >= 0``; terms above it are dropped.
    terms : mapping, optional
        Exponent tuple to coefficient.  Zero coefficients are purged.
    """

    __slots__ = ("dim", "cap", "_terms")

    def __init__(self, dim: int, cap: int, terms: Mapping | None = None, *, _trusted: bool = False):
        if dim < 1:
            raise DimensionError("dimension must be >= 1")
        if cap < 0:
            raise CertificationError(f"cap must be >= 0, got {cap}")
        self.dim = int(dim)
        self.cap = int(cap)
        if _trusted:
            self._terms = terms if terms is not None else {}
            return
        clean = {}
        for e, c in (terms or {}).items():
            e = _check_exp(e, dim)
            if sum(e) > cap:
                continue
            c = coerce(c)
            if c != 0:
                clean[e] = clean[e] + c if e in clean else c
        self._terms = {e: c for e, c in clean.items() if c != 0}

    # constructors -------------------------------------------------------
    @classmethod
    def _raw(cls, dim: int, cap: int, terms: dict) -> "MultiSeries":
        return cls(dim, cap, terms, _trusted=True)

    @classmethod
    def zero(cls, dim: int, cap: int) -> "MultiSeries":
        return cls(dim, cap)

    @classmethod
    def constant(cls, dim: int, cap: int, c=1) -> "MultiSeries":
        return cls(dim, cap, {(0,) * dim: c})

    @classmethod
    def one(cls, dim: int, cap: int) -> "MultiSeries":
        return cls.constant(dim, cap, 1)

    @classmethod
    def monomial(cls, dim: int, cap: int, exp: Sequence[int], c=1) -> "MultiSeries":
        return cls(dim, cap, {tuple(exp): c})

    @classmethod
    def variable(cls, dim: int, cap: int, j: int) -> "MultiSeries":
        """The coordinate ``x_j`` (1-based)."""
        if not 1 <= j <= dim:
            raise DimensionError(f"axis {j} outside 1..{dim}")
        e = [0] * dim
        e[j - 1] = 1
        return cls(dim, cap, {tuple(e): 1})

    # views --------------------------------------------------------------
    @property
    def terms(self) -> Mapping:
        return MappingProxyType(self._terms)

    def items_sorted(self):
        """Terms in graded-lexicographic order (degree, then exponent)."""
        return sorted(self._terms.items(), key=lambda t: (sum(t[0]), t[0]))

    def coefficient(self, exp: Sequence[int]):
        return self._terms.get(tuple(exp), mpq(0))

    def __getitem__(self, exp):
        return self.coefficient(exp)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self):
        return self.coefficient((0,) * self.dim)

    def order(self) -> int | None:
        """Lowest total degree of a stored term (``None`` for zero)."""
        return min((sum(e) for e in self._terms), default=None)

    def degree(self) -> int | None:
        return max((sum(e) for e in self._terms), default=None)

    def is_real(self) -> bool:
        return not any(isinstance(c, GaussRational) for c in self._terms.values())

    # structural ---------------------------------------------------------
    def truncate(self, cap: int) -> "MultiSeries":
        """Lower the truncation order (raising it would invent zeros)."""
        cap = min(cap, self.cap)
        if cap == self.cap:
            return self
        return MultiSeries._raw(self.dim, cap, {e: c for e, c in self._terms.items() if sum(e) <= cap})

    def as_polynomial(self, cap: int) -> "MultiSeries":
        """Reinterpret the stored terms as an exact polynomial at a new cap.

        Only sound when the caller knows there are no terms above the
        current cap (e.g. a germ entered as a polynomial).
        """
        return MultiSeries(self.dim, cap, self._terms)

    def _like(self, other: "MultiSeries") -> None:
        if not isinstance(other, MultiSeries):
            raise TypeError(f"expected MultiSeries, got {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")

    # ring operations ----------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, MultiSeries):
            return self + MultiSeries.constant(self.dim, self.cap, coerce(other))
        self._like(other)
        cap = min(self.cap, other.cap)
        out = {e: c for e, c in self._terms.items() if sum(e) <= cap}
        kernels.addmul_shifted(out, other._terms, 1, (0,) * self.dim, cap)
        return MultiSeries._raw(self.dim, cap, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiSeries._raw(self.dim, self.cap, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MultiSeries):
            return self + (-coerce(other))
        self._like(other)
        cap = min(self.cap, other.cap)
        out = {e: c for e, c in self._terms.items() if sum(e) <= cap}
        kernels.addmul_shifted(out, other._terms, -1, (0,) * self.dim, cap)
        return MultiSeries._raw(self.dim, cap, out)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "MultiSeries":
        c = coerce(c)
        if c == 0:
            return MultiSeries.zero(self.dim, self.cap)
        return MultiSeries._raw(self.dim, self.cap, {e: c * v for e, v in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, MultiSeries):
            try:
                return self.scale(other)
            except (TypeError, ValueError):
                return NotImplemented
        self._like(other)
        cap = min(self.cap, other.cap)
        return MultiSeries._raw(self.dim, cap, kernels.mul_terms(self._terms, other._terms, self.dim, cap))

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, MultiSeries):
            return self * other.invert_unit()
        return self.scale(1 / coerce(other))

    def __pow__(self, n: int) -> "MultiSeries":
        if not isinstance(n, int) or n < 0:
            raise ValueError("only natural powers are supported; use invert_unit for inverses")
        out = MultiSeries.one(self.dim, self.cap)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self.dim == other.dim and self.cap == other.cap and self._terms == other._terms

    def __hash__(self):
        return hash((self.dim, self.cap, frozenset(self._terms.items())))

    def equal_mod(self, other: "MultiSeries", cap: int | None = None) -> bool:
        """Equality of stored terms up to ``cap`` (default: the smaller cap)."""
        self._like(other)
        c = min(self.cap, other.cap) if cap is None else cap
        return self.truncate(c)._terms == other.truncate(c)._terms

    # calculus and shifts ------------------------------------------------
    def derive(self, j: int) -> "MultiSeries":
        """Formal partial derivative in ``x_j`` (1-based); the cap drops by one."""
        if not 1 <= j <= self.dim:
            raise DimensionError(f"axis {j} outside 1..{self.dim}")
        if self.cap == 0:
            raise CertificationError("derivative of a cap-0 series carries no certified terms")
        k = j - 1
        out = {}
        for e, c in self._terms.items():
            if e[k]:
                ne = e[:k] + (e[k] - 1,) + e[k + 1 :]
                out[ne] = c * e[k]
        return MultiSeries._raw(self.dim, self.cap - 1, out)

    def multiply_by_monomial(self, gamma: Sequence[int], c=1) -> "MultiSeries":
        """``c * x**gamma * self``; known terms move up, so the cap rises by ``|gamma|``."""
        gamma = _check_exp(gamma, self.dim)
        c = coerce(c)
        out = {tuple(a + b for a, b in zip(e, gamma)): c * v for e, v in self._terms.items()}
        return MultiSeries(self.dim, self.cap + sum(gamma), out)

    def divide_by_monomial(self, gamma: Sequence[int]) -> "MultiSeries":
        """Exact division by ``x**gamma``; the cap drops by ``|gamma|``.

        Raises
        ------
        DivisibilityError
            If some stored exponent is not ``>= gamma``.
        """
        gamma = _check_exp(gamma, self.dim)
        out = {}
        for e, c in self.items_sorted():
            if not exp_leq(gamma, e):
                raise DivisibilityError(f"term with exponent {e} is not divisible by x^{gamma}")
            out[tuple(a - b for a, b in zip(e, gamma))] = c
        new_cap = self.cap - sum(gamma)
        if new_cap < 0:
            raise CertificationError(f"dividing a cap-{self.cap} series by x^{gamma} leaves nothing certified")
        return MultiSeries._raw(self.dim, new_cap, out)

    def invert_unit(self) -> "MultiSeries":
        """Multiplicative inverse of a unit, by Newton iteration."""
        c0 = self.constant_term()
        if c0 == 0:
            raise NonUnitError("series has zero constant term")
        v = MultiSeries.constant(self.dim, 0, 1 / c0)
        prec = 0
        while prec < self.cap:
            prec = min(2 * prec + 1, self.cap)
            u = self.truncate(prec)
            v = v.as_polynomial(prec)
            v = v * (2 - u * v)
        return v

    # composition --------------------------------------------------------
    def substitute(self, rules: Sequence["MultiSeries | None"], certified: bool = False) -> "MultiSeries":
        """Compose with ``x_j -> rules[j-1]`` (``None`` keeps ``x_j``).

        The rules must share one target dimension.  Rules with a nonzero
        constant term are refused unless ``certified`` is set, in which case
        the caller vouches that the stored terms of ``self`` are exact.
        """
        return substitute(self, rules, certified=certified)

    # evaluation ---------------------------------------------------------
    def evaluate(self, point: Sequence):
        """Exact value of the stored polynomial at a rational/Gaussian point."""
        pt = [coerce(p) for p in point]
        if len(pt) != self.dim:
            raise DimensionError("point has wrong dimension")
        total = mpq(0)
        for e, c in self._terms.items():
            term = c
            for x, k in zip(pt, e):
                if k:
                    term = term * x**k
            total = total + term
        return total

    def evaluate_mp(self, point: Sequence, ctx=mpmath.mp):
        """Value of the stored polynomial at a numeric point (mpmath)."""
        pt = [ctx.mpmathify(p) for p in point]
        if len(pt) != self.dim:
            raise DimensionError("point has wrong dimension")
        total = ctx.mpf(0)
        for e, c in self._terms.items():
            term = to_mp(c, ctx)
            for x, k in zip(pt, e):
                if k:
                    term *= x**k
            total += term
        return total

    # display ------------------------------------------------------------
    def to_expr(self) -> str:
        """Render the stored terms in the polynomial input grammar."""
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.items_sorted():
            mono = "*".join(
                f"x{i + 1}" if k == 1 else f"x{i + 1}^{k}" for i, k in enumerate(e) if k
            )
            parts.append(_coef_str(c, mono))
        out = " + ".join(parts)
        return out.replace("+ -", "- ")

    def __repr__(self):
        return f"MultiSeries(dim={self.dim}, cap={self.cap}, {self.to_expr()})"


def _coef_str(c, mono: str) -> str:
    re_, im_ = re_im(c)
    if im_ == 0:
        if not mono:
            return _q_str(re_)
        if re_ == 1:
            return mono
        if re_ == -1:
            return "-" + mono
        return f"{_q_str(re_)}*{mono}"
    if re_ == 0:
        cs = {1: "I", -1: "-I"}.get(int(im_), f"{_q_str(im_)}*I") if im_.denominator == 1 else f"{_q_str(im_)}*I"
    else:
        cs = f"({_q_str(re_)} + {_q_str(im_)}*I)".replace("+ -", "- ")
    return f"{cs}*{mono}" if mono else cs


def _q_str(q) -> str:
    s = format_rational(q)
    return s[:-2] if s.endswith("/1") else f"({s})"


# module-level operations ----------------------------------------------------
def add(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    a._like(b)
    return a + b


def mul(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    a._like(b)
    return a * b


def derive(f: MultiSeries, j: int) -> MultiSeries:
    return f.derive(j)


def invert_unit(u: MultiSeries) -> MultiSeries:
    return u.invert_unit()


def divide_by_monomial(f: MultiSeries, gamma: Sequence[int]) -> MultiSeries:
    return f.divide_by_monomial(gamma)


def substitute(f: MultiSeries, rules: Sequence[MultiSeries | None], certified: bool = False) -> MultiSeries:
    """Formal composition ``f(rules[0], ..., rules[d-1])`` truncated to the smallest cap."""
    if len(rules) != f.dim:
        raise DimensionError(f"need {f.dim} replacement rules, got {len(rules)}")
    given = [r for r in rules if r is not None]
    tdim = given[0].dim if given else f.dim
    cap = f.cap
    for r in given:
        if r.dim != tdim:
            raise DimensionError("replacement rules live in different dimensions")
        cap = min(cap, r.cap)
    full = []
    for j, r in enumerate(rules):
        if r is None:
            if tdim != f.dim:
                raise DimensionError("identity rule needs matching source and target dimension")
            r = MultiSeries.variable(tdim, cap, j + 1)
        elif r.constant_term() != 0 and not certified:
            raise CertificationError(
                f"rule for x{j + 1} has nonzero constant term; pass certified=True if the "
                "substituted series is an exact polynomial"
            )
        full.append(r.truncate(cap))

    if all(len(r) == 1 for r in full):
        return _substitute_monomial(f, full, tdim, cap)

    # depth-first over exponents sorted lexicographically, so only the current
    # prefix product R_1^b1 ... R_k^bk is kept alive per axis
    powers: list[dict[int, MultiSeries]] = [{0: MultiSeries.one(tdim, cap)} for _ in range(f.dim)]

    def power(j: int, e: int) -> MultiSeries:
        cache = powers[j]
        if e not in cache:
            top = max(k for k in cache if k < e)
            p = cache[top]
            for k in range(top + 1, e + 1):
                p = p * full[j]
                cache[k] = p
        return cache[e]

    acc: dict = {}
    zero = (0,) * tdim
    items = sorted(f._terms.items())

    def walk(lo: int, hi: int, axis: int, prefix: MultiSeries) -> None:
        i = lo
        while i < hi:
            e_ax = items[i][0][axis]
            j = i
            while j < hi and items[j][0][axis] == e_ax:
                j += 1
            prod = prefix if e_ax == 0 else prefix * power(axis, e_ax)
            if not prod.is_zero():
                if axis == f.dim - 1:
                    for k in range(i, j):
                        kernels.addmul_shifted(acc, prod._terms, items[k][1], zero, cap)
                else:
                    walk(i, j, axis + 1, prod)
            i = j

    walk(0, len(items), 0, MultiSeries.one(tdim, cap))
    return MultiSeries._raw(tdim, cap, acc)


def _substitute_monomial(f: MultiSeries, rules: list[MultiSeries], tdim: int, cap: int) -> MultiSeries:
    # every rule is c_j * x^g_j: the image of x^b is prod c_j^b_j * x^(sum b_j g_j)
    mono = [next(iter(r._terms.items())) for r in rules]
    out: dict = {}
    for e, c in f._terms.items():
        ne = [0] * tdim
        coef = c
        for (g, cj), b in zip(mono, e):
            if b:
                for t in range(tdim):
                    ne[t] += b * g[t]
                coef = coef * cj**b
        if sum(ne) > cap:
            continue
        key = tuple(ne)
        v = out.get(key)
        v = coef if v is None else v + coef
        if v == 0:
            out.pop(key, None)
        else:
            out[key] = v
    return MultiSeries._raw(tdim, cap, out)


# germs and the Euler series ---------------------------------------------------
@dataclass(frozen=True)
class Germ:
    """A series vanishing at the origin, optionally flagged as an exact polynomial."""

    series: MultiSeries
    exact_polynomial: bool = False

    def __post_init__(self):
        if self.series.constant_term() != 0:
            raise GermsumError("a germ must vanish at the origin")
        if self.series.is_zero():
            raise GermsumError("zero germ (no stored terms up to cap)")

    @property
    def dim(self) -> int:
        return self.series.dim

    @property
    def cap(self) -> int:
        return self.series.cap

    @classmethod
    def polynomial(cls, series: MultiSeries) -> "Germ":
        return cls(series, True)

    def with_cap(self, cap: int) -> "Germ":
        """Same germ at another cap; raising the cap needs an exact polynomial."""
        if cap <= self.cap:
            return Germ(self.series.truncate(cap), self.exact_polynomial)
        if not self.exact_polynomial:
            raise CertificationError("cannot raise the cap of a truncated germ")
        return Germ(self.series.as_polynomial(cap), True)


def euler_coefficient(n: int) -> int:
    """Coefficient of ``t^(n+1)`` in the Euler series: ``(-1)^n n!``."""
    return (-1) ** n * math.factorial(n)


def euler_compose(P: Germ | MultiSeries) -> MultiSeries:
    """Truncation of ``sum_n (-1)^n n! P^(n+1)`` to ``P.cap`` (Horner in ``P``)."""
    s = P.series if isinstance(P, Germ) else P
    if s.is_zero():
        raise GermsumError("zero germ")
    if s.constant_term() != 0:
        raise GermsumError("Euler composition needs P(0) = 0")
    o = s.order()
    top = s.cap // o - 1
    if top < 0:
        return MultiSeries.zero(s.dim, s.cap)
    h = MultiSeries.constant(s.dim, s.cap, euler_coefficient(top))
    for n in range(top - 1, -1, -1):
        h = s * h + euler_coefficient(n)
    return s * h


def geometric_in(P: Germ | MultiSeries) -> MultiSeries:
    """Truncation of ``1/(1 - P)`` for a germ ``P``."""
    s = P.series if isinstance(P, Germ) else P
    return (1 - s).invert_unit()


def from_dense(dim: int, cap: int, fn) -> MultiSeries:
    """Series whose coefficient at ``e`` is ``fn(e)`` for every ``|e| <= cap``."""
    return MultiSeries(dim, cap, {e: fn(e) for e in exponents_upto(dim, cap)})


def exponents_upto(dim: int, cap: int) -> Iterable[tuple]:
    """All exponents of total degree ``<= cap`` in graded-lex order."""
    for deg in range(cap + 1):
        yield from exponents_of_degree(dim, deg)


def exponents_of_degree(dim: int, deg: int) -> Iterable[tuple]:
    if dim == 1:
        yield (deg,)
        return
    for first in range(deg, -1, -1):
        for rest in exponents_of_degree(dim - 1, deg - first):
            yield (first,) + rest
