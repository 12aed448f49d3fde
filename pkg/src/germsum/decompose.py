"""Splitting a series along powers of a monomial or of a germ.

``t_alpha`` partitions the terms of ``f`` by the largest power of ``x^alpha``
they contain.  ``t_p_ell`` iterates the generalized Weierstrass division by a
germ ``P`` relative to an injective positive linear form ``ell``; its
components live off ``nu_ell(P) + N^d``.  Both return a :class:`Decomposition`
whose ``reconstruct()`` reproduces the source up to ``certified_cap``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from germsum import kernels
from germsum.errors import CertificationError, DimensionError, GermsumError
from germsum.mseries import Germ, MultiSeries, exp_leq, exponents_upto


class LinearForm:
    """Positive rational weights ``ell_1 .. ell_d`` acting by ``ell(b) = sum ell_j b_j``.

    Passing ``cap`` checks injectivity on the box ``|b| <= cap``; a collision
    raises with a hint to perturb the weights.  Division itself only needs
    the divisor to have a unique ``ell``-minimal exponent, which
    :func:`nu_ell` enforces, so forms such as ``(1, 3/2)`` remain usable.
    """

    def __init__(self, weights: Sequence, cap: int | None = None):
        w = tuple(Fraction(x) for x in weights)
        if not w or any(x <= 0 for x in w):
            raise GermsumError(f"linear form weights must be positive, got {weights}")
        self.weights = w
        scale = math.lcm(*(x.denominator for x in w))
        self._int_weights = tuple(int(x * scale) for x in w)
        self._checked = -1
        if cap is not None:
            self.check_injective(cap)

    @classmethod
    def degree_compatible(cls, dim: int, cap: int) -> "LinearForm":
        """A form ordering first by total degree, injective on ``|b| <= cap``."""
        base = cap + 1
        eps = Fraction(1, base**dim)
        return cls([1 + eps * base**j for j in range(dim)], cap)

    @classmethod
    def parse(cls, text: str) -> "LinearForm":
        return cls([Fraction(t.strip()) for t in text.split(",")])

    @property
    def dim(self) -> int:
        return len(self.weights)

    def __call__(self, beta: Sequence[int]) -> Fraction:
        return sum((w * b for w, b in zip(self.weights, beta)), Fraction(0))

    def key(self, beta: Sequence[int]) -> int:
        """Integer proportional to ``ell(beta)`` (fast comparisons)."""
        return sum(w * b for w, b in zip(self._int_weights, beta))

    @property
    def ell_min(self) -> Fraction:
        return min(self.weights)

    @property
    def ell_max(self) -> Fraction:
        return max(self.weights)

    def check_injective(self, cap: int) -> None:
        if cap <= self._checked:
            return
        seen: dict = {}
        for e in exponents_upto(self.dim, cap):
            k = self.key(e)
            if k in seen:
                raise GermsumError(
                    f"linear form {self} is not injective on |b| <= {cap}: "
                    f"{seen[k]} and {e} collide; perturb the weights by small distinct rationals"
                )
            seen[k] = e
        self._checked = cap

    def __repr__(self):
        return f"LinearForm({', '.join(str(w) for w in self.weights)})"

    __str__ = __repr__


def _series_of(P, cap: int | None = None) -> MultiSeries:
    """The stored series; an exact polynomial germ is lifted to ``cap``."""
    if isinstance(P, Germ):
        if cap is not None and P.exact_polynomial and P.cap < cap:
            return P.with_cap(cap).series
        return P.series
    return P


def nu_ell(P: Germ | MultiSeries, ell: LinearForm) -> tuple:
    """The stored exponent of ``P`` with the least ``ell`` value."""
    s = _series_of(P)
    if s.is_zero():
        raise GermsumError("zero germ has no ell-minimal exponent")
    if ell.dim != s.dim:
        raise DimensionError("linear form and series dimensions differ")
    keys = sorted((ell.key(e), e) for e in s.terms)
    if len(keys) > 1 and keys[0][0] == keys[1][0]:
        raise GermsumError(f"ell ties between {keys[0][1]} and {keys[1][1]}; perturb the weights")
    return keys[0][1]


def weierstrass_divide(g: MultiSeries, P: Germ | MultiSeries, ell: LinearForm) -> tuple[MultiSeries, MultiSeries]:
    """Generalized Weierstrass division ``g = q P + r`` at truncated order.

    The ``ell``-least reducible term of the running remainder is removed
    until no stored exponent lies in ``nu + N^d`` (``nu = nu_ell(P)``).
    Each step only creates terms of strictly larger ``ell`` value, so the
    outcome does not depend on how ``ell``-ties between remainder terms are
    broken.

    Returns
    -------
    q : MultiSeries
        Quotient with cap ``N - |nu|``, where ``N = min(g.cap, P.cap)``
        (an exact polynomial germ ``P`` counts as having ``g.cap``).
    r : MultiSeries
        Remainder with cap ``N``, supported off ``nu + N^d``.

    Notes
    -----
    The identity ``g = q P + r`` holds exactly modulo degree ``> N`` when
    ``q`` is read as a polynomial (``q.as_polynomial(N) * P + r``).
    """
    s = _series_of(P, g.cap)
    if g.dim != s.dim or ell.dim != s.dim:
        raise DimensionError("dividend, divisor and linear form must share the dimension")
    N = min(g.cap, s.cap)
    nu = nu_ell(s.truncate(N), ell)
    dnu = sum(nu)
    if N < dnu:
        raise CertificationError(f"cap {N} is below |nu| = {dnu}; the quotient is not certified")
    lead = s.terms[nu]
    inv = 1 / lead
    p_terms = dict(s.truncate(N).terms)

    rem = {e: c for e, c in g.terms.items() if sum(e) <= N}
    heap = [(ell.key(e), e) for e in rem if exp_leq(nu, e)]
    heapq.heapify(heap)
    q: dict = {}
    while heap:
        _, beta = heapq.heappop(heap)
        c = rem.get(beta)
        if c is None:
            continue
        shift = tuple(b - n for b, n in zip(beta, nu))
        coef = c * inv
        q[shift] = q[shift] + coef if shift in q else coef
        kernels.addmul_shifted(rem, p_terms, -coef, shift, N)
        rem.pop(beta, None)
        room = N - sum(shift)
        for gam in p_terms:
            if sum(gam) > room:
                continue
            key = tuple(a + b for a, b in zip(shift, gam))
            if key != beta and key in rem and exp_leq(nu, key):
                heapq.heappush(heap, (ell.key(key), key))
    return MultiSeries(s.dim, N - dnu, q), MultiSeries(s.dim, N, rem)


Base = Union[Germ, tuple]


@dataclass
class Decomposition:
    """Components ``f_n`` with ``f = sum_n f_n B^n + tail * B^n_max`` up to ``certified_cap``.

    ``base`` is an exponent tuple (monomial ``x^alpha``) or a :class:`Germ`.
    """

    base: Base
    ell: LinearForm | None
    components: list
    certified_cap: int
    tail: MultiSeries | None = None

    @property
    def n_max(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim if self.components else len(self.base)

    def is_monomial(self) -> bool:
        return not isinstance(self.base, Germ)

    def _times_base_power(self, f: MultiSeries, n: int) -> MultiSeries:
        if self.is_monomial():
            return f.multiply_by_monomial(tuple(n * a for a in self.base))
        P = self.base.series.truncate(self.certified_cap)
        return f.truncate(self.certified_cap) * P**n

    def reconstruct(self) -> MultiSeries:
        d = self.dim
        total = MultiSeries.zero(d, self.certified_cap)
        for n, comp in enumerate(self.components):
            total = total + self._times_base_power(comp, n)
        if self.tail is not None:
            total = total + self._times_base_power(self.tail, self.n_max)
        return total.truncate(self.certified_cap)


def component_index(beta: Sequence[int], alpha: Sequence[int]) -> int:
    """``min over {j : alpha_j > 0}`` of ``floor(beta_j / alpha_j)``."""
    return min(b // a for b, a in zip(beta, alpha) if a > 0)


def t_alpha(f: MultiSeries, alpha: Sequence[int], n_max: int | None = None) -> Decomposition:
    """Split ``f`` by powers of ``x^alpha``.

    Component ``n < n_max`` collects ``f_beta x^(beta - n alpha)`` for the
    terms whose index ``component_index(beta, alpha)`` equals ``n``; its cap
    is ``f.cap - n |alpha|``.  Terms with index ``>= n_max`` form the tail,
    divided by ``x^(n_max alpha)``.  ``n_max`` defaults to (and may not
    exceed) ``f.cap // |alpha|``, so the split is an exact partition.
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != f.dim:
        raise DimensionError("alpha and series dimensions differ")
    if any(a < 0 for a in alpha) or not any(alpha):
        raise GermsumError("alpha must be a nonzero vector of naturals")
    size = sum(alpha)
    top = f.cap // size
    if n_max is None:
        n_max = top
    if n_max < 0 or n_max > top:
        raise CertificationError(f"n_max={n_max} needs n_max * |alpha| <= cap = {f.cap}")
    buckets: list = [dict() for _ in range(n_max)]
    tail: dict = {}
    for beta, c in f.terms.items():
        n = component_index(beta, alpha)
        if n < n_max:
            buckets[n][tuple(b - n * a for b, a in zip(beta, alpha))] = c
        else:
            tail[tuple(b - n_max * a for b, a in zip(beta, alpha))] = c
    comps = [MultiSeries(f.dim, f.cap - n * size, b) for n, b in enumerate(buckets)]
    return Decomposition(alpha, None, comps, f.cap, MultiSeries(f.dim, f.cap - n_max * size, tail))


def t_p_ell(f: MultiSeries, P: Germ | MultiSeries, ell: LinearForm, n_max: int) -> Decomposition:
    """Iterated division: component ``n`` is the remainder of the ``n``-th quotient.

    ``certified_cap = min(f.cap, P.cap) - |nu_ell(P)| * n_max``; the tail is
    the last quotient.  An exact polynomial germ counts as having ``f.cap``.
    """
    germ = P if isinstance(P, Germ) else Germ(P)
    if germ.exact_polynomial and germ.cap < f.cap:
        germ = germ.with_cap(f.cap)
    s = germ.series
    N = min(f.cap, s.cap)
    nu = nu_ell(s.truncate(N), ell)
    cert = N - sum(nu) * n_max
    if n_max < 0 or cert < 0:
        raise CertificationError(f"n_max={n_max} too large: certified cap would be {cert}")
    cur = f.truncate(N)
    comps = []
    for _ in range(n_max):
        q, r = weierstrass_divide(cur, s, ell)
        comps.append(r)
        cur = q
    return Decomposition(germ, ell, comps, cert, cur)


def power_regroup(dec: Decomposition, M: int) -> Decomposition:
    """Regroup components for the base ``B^M``: ``g_n = sum_{j<M} f_(nM+j) B^j``.

    Components left over when ``M`` does not divide ``n_max`` are folded,
    together with the old tail, into the new tail.
    """
    if M < 1:
        raise GermsumError("M must be >= 1")
    if dec.n_max < M:
        raise GermsumError(f"need at least {M} components, have {dec.n_max}")
    if M == 1:
        return dec
    k = dec.n_max // M
    comps = []
    for n in range(k):
        g = MultiSeries.zero(dec.dim, dec.components[n * M].cap)
        for j in range(M):
            g = g + dec._times_base_power(dec.components[n * M + j], j)
        comps.append(g)
    tail = None
    rest = dec.components[k * M :]
    if rest or dec.tail is not None:
        parts = [dec._times_base_power(c, j) for j, c in enumerate(rest)]
        if dec.tail is not None:
            parts.append(dec._times_base_power(dec.tail, len(rest)))
        tail = parts[0]
        for p in parts[1:]:
            tail = tail + p
    if dec.is_monomial():
        base: Base = tuple(M * a for a in dec.base)
    else:
        P = dec.base.series
        base = Germ(P**M, dec.base.exact_polynomial)
    return Decomposition(base, dec.ell, comps, dec.certified_cap, tail)
