"""Differential operators in one direction and Euler-type systems.

A :class:`SkewOperator` is ``sum_m c_m d_j^m`` with series coefficients,
acting on series and composing by the Leibniz rule
``d_j . f = f d_j + (d_j f)``.  ``euler_operator`` is the first order
operator annihilating ``E(P) - P`` up to its right-hand side, and
``build_L`` assembles a second order operator having ``E(P) + E(Q)`` as a
formal solution.  All polynomial identities are checked exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from germsum import kernels
from germsum.errors import (
    CertificationError,
    DegenerateOperatorError,
    DimensionError,
    DivisibilityError,
    GermsumError,
)
from germsum.mseries import Germ, MultiSeries, euler_compose


# skew operators ---------------------------------------------------------------
@dataclass
class SkewOperator:
    """``sum_m terms[m] * d_j^m`` acting on series in ``dim`` variables."""

    dim: int
    axis: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.axis <= self.dim:
            raise DimensionError(f"axis {self.axis} outside 1..{self.dim}")
        clean = {}
        for m, c in self.terms.items():
            if m < 0:
                raise GermsumError("derivative orders are natural numbers")
            if c.dim != self.dim:
                raise DimensionError("coefficient dimension differs from the operator's")
            if not c.is_zero():
                clean[int(m)] = c
        self.terms = clean

    @classmethod
    def derivation(cls, dim: int, axis: int, cap: int) -> "SkewOperator":
        return cls(dim, axis, {1: MultiSeries.one(dim, cap)})

    @classmethod
    def multiplication(cls, f: MultiSeries, axis: int) -> "SkewOperator":
        return cls(f.dim, axis, {0: f})

    @property
    def order(self) -> int:
        return max(self.terms, default=0)

    def coefficient(self, m: int) -> MultiSeries | None:
        return self.terms.get(m)

    def apply(self, y: MultiSeries) -> MultiSeries:
        """``sum_m terms[m] * d_j^m y``; the cap drops by the order."""
        if y.dim != self.dim:
            raise DimensionError("operator and series dimensions differ")
        if not self.terms:
            return MultiSeries.zero(self.dim, y.cap)
        top = self.order
        if y.cap < top:
            raise CertificationError(f"cap {y.cap} is below the operator order {top}")
        cap = y.cap - top
        out = MultiSeries.zero(self.dim, cap)
        dy = y
        for m in range(top + 1):
            if m:
                dy = dy.derive(self.axis)
            c = self.terms.get(m)
            if c is not None:
                out = out + (c * dy).truncate(cap)
        return out

    __call__ = apply

    def __add__(self, other: "SkewOperator") -> "SkewOperator":
        self._like(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms[m] + c if m in terms else c
        return SkewOperator(self.dim, self.axis, terms)

    def __matmul__(self, other: "SkewOperator") -> "SkewOperator":
        """Composition ``self . other`` via ``d^m g = sum_i C(m,i) (d^i g) d^(m-i)``."""
        self._like(other)
        out: dict = {}
        for m, a in self.terms.items():
            for n, b in other.terms.items():
                db = b
                for i in range(m + 1):
                    if i:
                        db = db.derive(self.axis)
                    term = a * db.scale(math.comb(m, i))
                    k = m - i + n
                    out[k] = out[k] + term if k in out else term
        return SkewOperator(self.dim, self.axis, out)

    def _like(self, other: "SkewOperator") -> None:
        if (self.dim, self.axis) != (other.dim, other.axis):
            raise DimensionError("operators act in different dimensions or directions")


def apply(L: SkewOperator, y: MultiSeries) -> MultiSeries:
    return L.apply(y)


# exact polynomial helpers -----------------------------------------------------
def _glex(e: tuple) -> tuple:
    return (sum(e), e)


def poly_divide_exact(f: MultiSeries, g: MultiSeries) -> MultiSeries:
    """Exact quotient ``f / g`` of polynomials (graded-lex leading terms).

    Raises
    ------
    DivisibilityError
        If ``g`` does not divide ``f``.
    """
    if g.is_zero():
        raise DivisibilityError("division by the zero polynomial")
    lead = max(g.terms, key=_glex)
    lc = g.terms[lead]
    big = f.cap + g.cap
    src = dict(g.terms)
    rem = dict(f.terms)
    q: dict = {}
    while rem:
        top = max(rem, key=_glex)
        if any(a < b for a, b in zip(top, lead)):
            raise DivisibilityError(f"leading term x^{top} is not divisible by x^{lead}")
        shift = tuple(a - b for a, b in zip(top, lead))
        c = rem[top] / lc
        q[shift] = c
        kernels.addmul_shifted(rem, src, -c, shift, big)
        rem.pop(top, None)
    return MultiSeries(f.dim, f.cap, q)


def _poly(P: Germ | MultiSeries, what: str) -> MultiSeries:
    if isinstance(P, Germ):
        if not P.exact_polynomial:
            raise GermsumError(f"{what} must be an exact polynomial")
        return P.series
    return P


def _work_cap(*polys: MultiSeries) -> int:
    return 6 * sum(p.degree() or 0 for p in polys) + 2


# Euler operator ---------------------------------------------------------------
def euler_operator(P: MultiSeries, j: int, cap: int) -> SkewOperator:
    """``P^2 d_j + d_j P`` with coefficients held exactly at ``cap``."""
    Pc = P.as_polynomial(cap)
    return SkewOperator(P.dim, j, {1: Pc * Pc, 0: P.as_polynomial(cap + 1).derive(j)})


def euler_system_check(P: Germ | MultiSeries, j: int, cap: int | None = None, y: MultiSeries | None = None) -> bool:
    """Does ``y`` (default ``E(P)``) solve ``P^2 y' + P' y = P' P`` in ``x_j`` mod ``cap - 1``?

    Raises
    ------
    CertificationError
        If ``cap < deg(P)^2 + 2``.
    """
    s = _poly(P, "P")
    cap = s.cap if cap is None else cap
    deg = s.degree() or 0
    if cap < deg * deg + 2:
        raise CertificationError(f"cap {cap} is below deg(P)^2 + 2 = {deg * deg + 2}")
    s = s.as_polynomial(cap)
    if y is None:
        y = euler_compose(s)
    L = euler_operator(s, j, cap)
    lhs = L.apply(y.truncate(cap))
    rhs = s * s.as_polynomial(cap + 1).derive(j)
    return lhs.equal_mod(rhs, cap - 1)


# the two-germ operator --------------------------------------------------------
@dataclass
class TwoEulerOperator:
    """``L_j = A d_j^2 + B d_j + C`` with the factor operators' data."""

    L: SkewOperator
    rhs: MultiSeries
    A: MultiSeries
    B: MultiSeries
    C: MultiSeries
    M_P: SkewOperator
    M_Q: SkewOperator
    work_cap: int


def _factor_data(A: MultiSeries, B: MultiSeries, P: MultiSeries, j: int) -> tuple:
    """Coefficients ``a, b`` of ``M = a d_j + b`` with ``a d^2 + B d + ... = M (P^2 d + P')``, and ``C``."""
    P2 = P * P
    dP = P.derive(j).as_polynomial(P.cap)
    ddP = dP.derive(j).as_polynomial(P.cap)
    a = poly_divide_exact(A, P2)
    b = poly_divide_exact(B - a * (2 * P + 1) * dP, P2)
    C = a * ddP + b * dP
    return a, b, C


def _B_coefficient(P, Q, dP, dQ, ddP, ddQ):
    P2, Q2 = P * P, Q * Q
    return Q2 * Q2 * ((2 * P + 1) * dP * dP - P2 * ddP) - P2 * P2 * ((2 * Q + 1) * dQ * dQ - Q2 * ddQ)


def build_L(P: Germ | MultiSeries, Q: Germ | MultiSeries, j: int, cap: int | None = None) -> TwoEulerOperator:
    """Operator with ``E(P) + E(Q)`` as formal solution in the direction ``x_j``.

    ``A = P^2 Q^2 (Q^2 P' - P^2 Q')`` and
    ``B = Q^4 ((2P+1) P'^2 - P^2 P'') - P^4 ((2Q+1) Q'^2 - Q^2 Q'')``
    (primes are ``d/dx_j``).  ``C`` is computed from the ``P`` side and from
    the ``Q`` side and the two are asserted equal.  All divisions by ``P^2``
    and ``Q^2`` are exact polynomial divisions.

    Raises
    ------
    DegenerateOperatorError
        If ``A`` is the zero polynomial.
    DivisibilityError
        If an expected exact division leaves a remainder.
    """
    Ps, Qs = _poly(P, "P"), _poly(Q, "Q")
    if Ps.dim != Qs.dim:
        raise DimensionError("P and Q have different dimensions")
    dim = Ps.dim
    if not 1 <= j <= dim:
        raise DimensionError(f"axis {j} outside 1..{dim}")
    D = max(_work_cap(Ps, Qs), cap or 0)
    Pw, Qw = Ps.as_polynomial(D), Qs.as_polynomial(D)
    dP, dQ = Pw.as_polynomial(D + 1).derive(j), Qw.as_polynomial(D + 1).derive(j)
    ddP, ddQ = dP.as_polynomial(D + 1).derive(j), dQ.as_polynomial(D + 1).derive(j)
    P2, Q2 = Pw * Pw, Qw * Qw
    A = P2 * Q2 * (Q2 * dP - P2 * dQ)
    if A.is_zero():
        raise DegenerateOperatorError(
            f"A_{j} vanishes identically: Q is a unit multiple of P in this direction, "
            "so the pair yields no new equation"
        )
    B = _B_coefficient(Pw, Qw, dP, dQ, ddP, ddQ)
    for name, poly in (("A", A), ("B", B)):
        if (poly.degree() or 0) >= D:
            raise CertificationError(f"{name} reaches the working cap {D}; raise it")
    aP, bP, CP = _factor_data(A, B, Pw, j)
    aQ, bQ, CQ = _factor_data(A, B, Qw, j)
    if CP != CQ:
        raise GermsumError("C computed from the P side and from the Q side disagree")
    L = SkewOperator(dim, j, {2: A, 1: B, 0: CP})
    M_P = SkewOperator(dim, j, {1: aP, 0: bP})
    M_Q = SkewOperator(dim, j, {1: aQ, 0: bQ})
    # M_P(P P') + M_Q(Q Q') with the polynomials held well inside the cap
    PdP = (Pw * dP).as_polynomial(D + 1)
    QdQ = (Qw * dQ).as_polynomial(D + 1)
    rhs = M_P.apply(PdP) + M_Q.apply(QdQ)
    return TwoEulerOperator(L, rhs, A, B, CP, M_P, M_Q, D)


def homogeneous_order(rhs: MultiSeries, j: int) -> int:
    """Least ``N`` with ``d_j^N rhs = 0`` for a polynomial ``rhs``."""
    if rhs.is_zero():
        return 0
    return 1 + max(e[j - 1] for e in rhs.terms)


@dataclass
class TwoEulerReport:
    passed: bool
    compared_up_to: int
    homogeneous_N: int
    homogeneous_ok: bool
    homogeneous_checked: bool

    def __bool__(self):
        return self.passed and self.homogeneous_ok


def two_euler_report(P: Germ | MultiSeries, Q: Germ | MultiSeries, j: int, cap: int, op: TwoEulerOperator | None = None) -> TwoEulerReport:
    """Check ``L_j(E(P) + E(Q)) = rhs`` modulo degree ``> cap - 2``.

    Also finds the least ``N`` killing the polynomial right-hand side and
    checks ``d_j^N L_j(y) = 0`` on the stored terms.
    """
    Ps, Qs = _poly(P, "P"), _poly(Q, "Q")
    if cap < 3:
        raise CertificationError("cap must be at least 3")
    op = op if op is not None else build_L(Ps, Qs, j)
    y = euler_compose(Ps.as_polynomial(cap)) + euler_compose(Qs.as_polynomial(cap))
    lhs = op.L.apply(y)
    top = cap - 2
    ok = lhs.equal_mod(op.rhs.truncate(top), top)
    N = homogeneous_order(op.rhs, j)
    # with N > top no stored term survives N derivatives: nothing to check
    checked = N <= top
    hom = lhs
    if checked:
        for _ in range(N):
            hom = hom.derive(j)
    return TwoEulerReport(ok, top, N, hom.is_zero() if checked else True, checked)


def verify_two_euler(P: Germ | MultiSeries, Q: Germ | MultiSeries, j: int, cap: int) -> bool:
    """Whether ``E(P) + E(Q)`` solves the assembled system mod ``cap - 2``."""
    return bool(two_euler_report(P, Q, j, cap))
