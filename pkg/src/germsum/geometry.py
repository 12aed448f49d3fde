"""Couples ``(alpha, 1/k)``, monomial maps and the ordering-by-blow-up algorithm.

A couple is stored as an exponent ``alpha`` and a positive rational ``k``;
everything order-related works on the normal form ``k * alpha``.  Axes are
1-based.  ``Pi(i, j, n)`` adds ``n * alpha_j`` to ``alpha_i`` (pullback by the
chart ``x_j -> x_i x_j`` applied ``n`` times) and ``Ram(j, m)`` multiplies
``alpha_j`` by ``m`` (``x_j -> x_j^m``).
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence, Union

from germsum.coeffs import coerce
from germsum.errors import CertificationError, DimensionError, GermsumError, ParseError
from germsum.mseries import Germ, MultiSeries


# couples ---------------------------------------------------------------------
@dataclass(frozen=True)
class Couple:
    """An element ``(alpha, 1/k)`` of the couple space."""

    alpha: tuple
    k: Fraction = Fraction(1)

    def __post_init__(self):
        alpha = tuple(int(a) for a in self.alpha)
        if not alpha or any(a < 0 for a in alpha) or not any(alpha):
            raise GermsumError(f"alpha must be a nonzero vector of naturals, got {self.alpha}")
        k = Fraction(self.k)
        if k <= 0:
            raise GermsumError(f"k must be positive, got {self.k}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "k", k)

    @property
    def dim(self) -> int:
        return len(self.alpha)

    def normal_form(self) -> tuple:
        return tuple(self.k * a for a in self.alpha)

    def __str__(self):
        return f"alpha=[{','.join(map(str, self.alpha))}] k={self.k}"


_COUPLE_RE = re.compile(r"^\s*alpha\s*=\s*\[([^\]]*)\]\s*(?:k\s*=\s*([0-9/\s]+))?\s*$")


def parse_couple(text: str) -> Couple:
    """Parse ``"alpha=[1,3] k=2/3"`` (``k`` defaults to 1)."""
    m = _COUPLE_RE.match(text)
    if not m:
        raise ParseError(f"cannot parse couple {text!r}; expected 'alpha=[a1,...,ad] k=p/q'")
    try:
        alpha = tuple(int(v) for v in m.group(1).split(","))
        k = Fraction(m.group(2).replace(" ", "")) if m.group(2) else Fraction(1)
        return Couple(alpha, k)
    except (ValueError, ZeroDivisionError, GermsumError) as exc:
        raise ParseError(f"bad couple {text!r}: {exc}") from None


class Order(enum.Enum):
    EQ = "EQ"
    STRICT_LT = "STRICT_LT"
    LT = "LT"
    STRICT_GT = "STRICT_GT"
    GT = "GT"
    INCOMPARABLE = "INCOMPARABLE"


def _same_dim(a: Couple, b: Couple) -> None:
    if a.dim != b.dim:
        raise DimensionError(f"couples of dimensions {a.dim} and {b.dim}")


def couple_equiv(a: Couple, b: Couple) -> bool:
    _same_dim(a, b)
    return a.normal_form() == b.normal_form()


def compare_vectors(u: Sequence, v: Sequence) -> Order:
    if tuple(u) == tuple(v):
        return Order.EQ
    if all(x < y for x, y in zip(u, v)):
        return Order.STRICT_LT
    if all(x <= y for x, y in zip(u, v)):
        return Order.LT
    if all(x > y for x, y in zip(u, v)):
        return Order.STRICT_GT
    if all(x >= y for x, y in zip(u, v)):
        return Order.GT
    return Order.INCOMPARABLE


def couple_compare(a: Couple, b: Couple) -> Order:
    """Classify ``a`` against ``b``; ``LT``/``GT`` mean comparable but not strict."""
    _same_dim(a, b)
    return compare_vectors(a.normal_form(), b.normal_form())


# monomial maps ---------------------------------------------------------------
@dataclass(frozen=True)
class Pi:
    """``alpha_i += n * alpha_j``; substitution ``x_j -> x_i^n x_j``."""

    i: int
    j: int
    n: int = 1

    def __post_init__(self):
        if self.i == self.j:
            raise GermsumError("Pi step needs two distinct axes")
        if self.n < 1 or self.i < 1 or self.j < 1:
            raise GermsumError("Pi step needs positive axes and repetition count")

    def __str__(self):
        return f"pi({self.i},{self.j})" + (f"^{self.n}" if self.n != 1 else "")


@dataclass(frozen=True)
class Ram:
    """``alpha_j *= m``; substitution ``x_j -> x_j^m``."""

    j: int
    m: int

    def __post_init__(self):
        if self.m < 2 or self.j < 1:
            raise GermsumError("ramification needs a positive axis and m >= 2")

    def __str__(self):
        return f"ram({self.j},{self.m})"


Step = Union[Pi, Ram]


def _step_exponent(step: Step, alpha: Sequence) -> tuple:
    a = list(alpha)
    if isinstance(step, Pi):
        a[step.i - 1] = a[step.i - 1] + step.n * a[step.j - 1]
    else:
        a[step.j - 1] = a[step.j - 1] * step.m
    return tuple(a)


@dataclass(frozen=True)
class MonomialMap:
    """A word of elementary steps, applied left to right."""

    dim: int
    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        for s in self.steps:
            axes = (s.i, s.j) if isinstance(s, Pi) else (s.j,)
            if any(ax > self.dim for ax in axes):
                raise DimensionError(f"step {s} outside dimension {self.dim}")

    def then(self, other: "MonomialMap") -> "MonomialMap":
        if other.dim != self.dim:
            raise DimensionError("words of different dimension")
        return MonomialMap(self.dim, self.steps + other.steps)

    def merged(self) -> "MonomialMap":
        """Fuse consecutive ``Pi`` steps on the same axes into one repetition count."""
        out: list = []
        for s in self.steps:
            if out and isinstance(s, Pi) and isinstance(out[-1], Pi) and (out[-1].i, out[-1].j) == (s.i, s.j):
                out[-1] = Pi(s.i, s.j, out[-1].n + s.n)
            else:
                out.append(s)
        return MonomialMap(self.dim, tuple(out))

    def pullback_exponent(self, alpha: Sequence) -> tuple:
        if len(alpha) != self.dim:
            raise DimensionError("exponent and word dimensions differ")
        a = tuple(alpha)
        for s in self.steps:
            a = _step_exponent(s, a)
        return a

    def pullback_couple(self, c: Couple) -> Couple:
        return Couple(self.pullback_exponent(c.alpha), c.k)

    def pullback_series(self, f: MultiSeries) -> MultiSeries:
        if f.dim != self.dim:
            raise DimensionError("series and word dimensions differ")
        for s in self.steps:
            rules: list = [None] * f.dim
            if isinstance(s, Pi):
                e = [0] * f.dim
                e[s.i - 1] = s.n
                e[s.j - 1] = 1
                rules[s.j - 1] = MultiSeries.monomial(f.dim, f.cap, e)
            else:
                e = [0] * f.dim
                e[s.j - 1] = s.m
                rules[s.j - 1] = MultiSeries.monomial(f.dim, f.cap, e)
            f = f.substitute(rules)
        return f

    def __str__(self):
        return " ; ".join(str(s) for s in self.steps)


_STEP_RE = re.compile(r"^(pi|ram)\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*(?:\^\s*(\d+))?$")


def parse_word(text: str, dim: int) -> MonomialMap:
    """Parse ``"pi(2,1)^3 ; ram(1,2)"``; the empty string is the identity."""
    steps: list = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        m = _STEP_RE.match(chunk)
        if not m:
            raise ParseError(f"cannot parse step {chunk!r}")
        kind, a, b, rep = m.group(1), int(m.group(2)), int(m.group(3)), m.group(4)
        try:
            if kind == "pi":
                steps.append(Pi(a, b, int(rep) if rep else 1))
            else:
                for _ in range(int(rep) if rep else 1):
                    steps.append(Ram(a, b))
        except GermsumError as exc:
            raise ParseError(f"bad step {chunk!r}: {exc}") from None
    try:
        return MonomialMap(dim, tuple(steps))
    except GermsumError as exc:
        raise ParseError(str(exc)) from None


def pullback_couple(m: MonomialMap, c: Couple) -> Couple:
    return m.pullback_couple(c)


def pullback_series(m: MonomialMap, f: MultiSeries) -> MultiSeries:
    return m.pullback_series(f)


INF = "inf"


def blowup_chart(f: MultiSeries, xi=0) -> MultiSeries:
    """Compose with a chart of the blow-up of ``{x1 = x2 = 0}``.

    ``xi = INF`` gives ``(x1, x2) -> (x1 x2, x2)``; a finite ``xi`` gives
    ``(x1, x2) -> (x2, (xi + x1) x2)``.  Other coordinates are fixed.
    """
    if f.dim < 2:
        raise DimensionError("blow-up charts need at least two variables")
    d, n = f.dim, f.cap
    x1 = MultiSeries.variable(d, n, 1)
    x2 = MultiSeries.variable(d, n, 2)
    rules: list = [None] * d
    if isinstance(xi, str) and xi.lower() in ("inf", "infinity", "oo"):
        rules[0] = x1 * x2
        rules[1] = x2
    else:
        rules[0] = x2
        rules[1] = x2.scale(coerce(xi)) + x1 * x2 if coerce(xi) != 0 else x1 * x2
    return f.substitute(rules)


def ramify(f: MultiSeries, j: int, m: int) -> MultiSeries:
    return MonomialMap(f.dim, (Ram(j, m),)).pullback_series(f)


# ordering algorithm ----------------------------------------------------------
@dataclass
class TraceStep:
    """One corrective step of :func:`order_couples` with the bound it satisfies."""

    step: Step
    pair: tuple  # (smaller, larger) couple indices at axis l
    l: int
    m: int
    bound: Fraction | None  # (beta_i,m - beta_j,m) / (beta_j,l - beta_i,l); None for zero fixes


@dataclass
class OrderingResult:
    word: MonomialMap
    permutation: list
    images: list
    trace: list = field(default_factory=list)


def order_couples(cs: Sequence[Couple]) -> OrderingResult:
    """Find a monomial blow-up after which the couples are strictly totally ordered.

    First every zero entry is removed: for the first couple with
    ``alpha_j = 0`` the step ``Pi(j, i, 1)`` with ``i`` its first positive
    axis raises ``alpha_j``.  Then, while some pair is not strictly ordered,
    the lexicographically first such pair is fixed: ``l`` is the first axis
    where the normal forms differ (couple ``i`` smaller there), ``m`` the
    first axis with ``beta_i,m >= beta_j,m``, and ``Pi(m, l, N)`` is applied
    with ``N`` the least integer exceeding
    ``(beta_i,m - beta_j,m) / (beta_j,l - beta_i,l)``.

    Returns
    -------
    OrderingResult
        ``word`` (consecutive equal steps merged), ``permutation`` (input
        indices from smallest to largest image), ``images`` (pulled-back
        couples in input order) and a per-step ``trace``.
    """
    cs = list(cs)
    if not cs:
        raise GermsumError("order_couples needs at least one couple")
    d = cs[0].dim
    if any(c.dim != d for c in cs):
        raise DimensionError("couples of mixed dimension")
    for a, b in combinations(range(len(cs)), 2):
        if couple_equiv(cs[a], cs[b]):
            raise GermsumError(f"couples #{a} and #{b} are equivalent; no strict order exists")

    alphas = [list(c.alpha) for c in cs]
    ks = [c.k for c in cs]
    steps: list = []
    trace: list = []

    def apply(step: Step) -> None:
        for a in alphas:
            a[:] = _step_exponent(step, a)
        steps.append(step)

    while True:
        hit = next(((idx, j) for idx, a in enumerate(alphas) for j in range(d) if a[j] == 0), None)
        if hit is None:
            break
        idx, j = hit
        i = next(t for t in range(d) if alphas[idx][t] > 0)
        step = Pi(j + 1, i + 1, 1)
        apply(step)
        trace.append(TraceStep(step, (idx,), i + 1, j + 1, None))

    def nf(idx: int) -> list:
        return [ks[idx] * a for a in alphas[idx]]

    n = len(cs)
    while True:
        pair = None
        for a, b in combinations(range(n), 2):
            if compare_vectors(nf(a), nf(b)) not in (Order.STRICT_LT, Order.STRICT_GT):
                pair = (a, b)
                break
        if pair is None:
            break
        bi, bj = nf(pair[0]), nf(pair[1])
        l = next(t for t in range(d) if bi[t] != bj[t])
        lo, hi = pair
        if bi[l] > bj[l]:
            lo, hi = hi, lo
            bi, bj = bj, bi
        m = next(t for t in range(d) if bi[t] >= bj[t])
        bound = Fraction(bi[m] - bj[m]) / (bj[l] - bi[l])
        reps = math.floor(bound) + 1
        step = Pi(m + 1, l + 1, reps)
        apply(step)
        trace.append(TraceStep(step, (lo, hi), l + 1, m + 1, bound))

    images = [Couple(tuple(a), k) for a, k in zip(alphas, ks)]
    perm = sorted(range(n), key=lambda t: tuple(images[t].normal_form()))
    return OrderingResult(MonomialMap(d, tuple(steps)).merged(), perm, images, trace)


# germ couples ----------------------------------------------------------------
@dataclass(frozen=True)
class GermCouple:
    P: Germ
    k: Fraction = Fraction(1)

    def __post_init__(self):
        k = Fraction(self.k)
        if k <= 0:
            raise GermsumError("k must be positive")
        object.__setattr__(self, "k", k)


@dataclass
class EquivReport:
    equivalent: bool
    exact: bool
    p_a: int
    p_b: int
    unit: MultiSeries | None
    certified_cap: int

    def __bool__(self):
        return self.equivalent

    @property
    def qualifier(self) -> str:
        return "exact" if self.exact else f"mod degree > {self.certified_cap}"


def germ_couple_equiv(a: GermCouple, b: GermCouple) -> EquivReport:
    """Decide whether ``P_b^p_b = U * P_a^p_a`` with ``U`` a unit, where
    ``p_a / k_a = p_b / k_b`` in lowest terms.

    The decision divides ``P_b^p_b`` by ``P_a^p_a`` with a linear form that
    refines total degree; equivalence holds iff the remainder vanishes and
    the quotient has a nonzero constant term.  For exact polynomial germs the
    working cap is raised to cover both powers, and the verdict is flagged
    exact when the quotient times ``P_a^p_a`` reproduces ``P_b^p_b`` as
    polynomials.
    """
    from germsum.decompose import LinearForm, weierstrass_divide

    if a.P.dim != b.P.dim:
        raise DimensionError("germs of different dimension")
    ratio = a.k / b.k
    p_a, p_b = ratio.numerator, ratio.denominator

    both_exact = a.P.exact_polynomial and b.P.exact_polynomial
    if both_exact:
        cap = max(a.P.cap, b.P.cap, p_a * a.P.series.degree(), p_b * b.P.series.degree())
    else:
        cap = min(a.P.cap, b.P.cap)
    Pa = a.P.with_cap(cap).series
    Pb = b.P.with_cap(cap).series
    G = Pa**p_a
    F = Pb**p_b
    if G.is_zero():
        raise CertificationError(f"P_a^{p_a} vanishes up to degree {cap}; raise the cap")
    cert = cap - G.order()
    if cert < 0:
        raise CertificationError("certified order too low to decide equivalence")
    ell = LinearForm.degree_compatible(a.P.dim, cap)
    q, r = weierstrass_divide(F, Germ(G), ell)
    equivalent = r.is_zero() and q.constant_term() != 0
    exact = False
    if both_exact and equivalent:
        deg_q = q.degree() or 0
        big = max(cap, deg_q + G.degree())
        exact = q.as_polynomial(big) * G.as_polynomial(big) == F.as_polynomial(big)
    return EquivReport(equivalent, exact, p_a, p_b, q.truncate(cert) if equivalent else None, cert if not exact else cap)


# convergence transport -------------------------------------------------------
@dataclass
class TransportReport:
    verdicts: dict
    agree: bool


def convergence_transport_check(f: MultiSeries, m: int = 2, xi=0, axis: int = 1) -> TransportReport:
    """Radius verdicts of ``f``, ``f o r_m`` and ``f o b_xi`` and whether they agree."""
    from germsum.gevrey import radius_estimate

    variants = {"f": f, "ramified": ramify(f, axis, m)}
    if f.dim >= 2:
        variants["blown_up"] = blowup_chart(f, xi)
    verdicts = {name: radius_estimate(g) for name, g in variants.items()}
    kinds = {v.kind for v in verdicts.values()}
    return TransportReport(verdicts, len(kinds) == 1)
