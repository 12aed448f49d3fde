from __future__ import annotations

import math

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from conftest import dense_product, series
from germsum.errors import (
    CertificationError,
    DimensionError,
    DivisibilityError,
    GermsumError,
    NonUnitError,
)
from germsum.mseries import Germ, MultiSeries, euler_compose, exp_leq, exp_lt, exp_not_leq
from germsum.polyexpr import parse_polynomial as poly


def X(d, n, j):
    return MultiSeries.variable(d, n, j)


# exponents ------------------------------------------------------------------------
def test_exponent_orders():
    assert exp_leq((1, 2), (1, 3)) and not exp_leq((2, 0), (1, 3))
    assert exp_lt((0, 1), (1, 2)) and not exp_lt((1, 1), (1, 2))
    assert exp_not_leq((2, 0), (1, 3)) and not exp_not_leq((1, 1), (1, 1))


def test_invariants_enforced():
    # terms above the cap are truncated away, never stored
    assert MultiSeries(2, 2, {(2, 1): 1, (1, 0): 1}) == MultiSeries.variable(2, 2, 1)
    f = MultiSeries(2, 3, {(1, 0): 0, (0, 1): 2})
    assert dict(f.terms) == {(0, 1): 2}
    with pytest.raises(GermsumError):
        MultiSeries(2, 3, {(1,): 1})


# add / mul --------------------------------------------------------------------------
def test_add_examples():
    x1 = X(2, 4, 1)
    assert (x1 + (-x1)).is_zero()
    x1x2 = X(2, 4, 1) * X(2, 4, 2)
    assert (1 + x1x2) + x1x2 == MultiSeries(2, 4, {(0, 0): 1, (1, 1): 2})
    E = euler_compose(x1x2)
    assert (E + (-E)).is_zero()


def test_add_cap_is_min_and_dims_checked():
    a, b = MultiSeries.one(2, 5), MultiSeries.one(2, 3)
    assert (a + b).cap == 3
    with pytest.raises(DimensionError):
        MultiSeries.one(1, 3) + MultiSeries.one(2, 3)


def test_mul_examples():
    x1 = X(1, 4, 1)
    assert (1 + x1) * (1 - x1) == 1 - x1 * x1
    E1 = euler_compose(X(2, 8, 1))
    E2 = euler_compose(X(2, 8, 2))
    F = E1 * E2
    # the signs of the two factors square away: F_kk = ((k-1)!)^2
    for k in range(1, 5):
        assert F.coefficient((k, k)) == math.factorial(k - 1) ** 2
    assert F.coefficient((3, 3)) == 4
    u, v = 2 + X(2, 4, 1), 3 - X(2, 4, 2)
    assert (u * v).constant_term() == 6


@given(series(dim=2, cap=5), series(dim=2, cap=5), series(dim=2, cap=5))
def test_ring_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)


@given(series(dim=3, cap=5, max_terms=10), series(dim=3, cap=5, max_terms=10))
def test_mul_matches_dense_oracle(a, b):
    assert dict((a * b).terms) == dense_product(a, b)


# derive ------------------------------------------------------------------------------
def test_derive_examples():
    f = poly("x1^2*x2")
    assert f.derive(1) == MultiSeries(2, 2, {(1, 1): 2})
    assert poly("x1^2", dim=2).derive(2).is_zero()
    E = euler_compose(X(2, 10, 1) * X(2, 10, 2))
    assert E.derive(1).coefficient((0, 1)) == 1
    assert E.derive(1).cap == 9
    with pytest.raises(DimensionError):
        f.derive(3)


def test_derive_cap_zero():
    with pytest.raises(CertificationError):
        MultiSeries.one(1, 0).derive(1)


# substitute ---------------------------------------------------------------------------
def test_substitute_examples():
    d, n = 2, 6
    x1, x2 = X(d, n, 1), X(d, n, 2)
    f = x1 * x2
    assert f.substitute([x1 * x1, None]) == MultiSeries(2, 6, {(2, 1): 1})
    assert f.substitute([x2, x1 * x2]) == MultiSeries(2, 6, {(1, 2): 1})
    assert x1.substitute([x1, x2]) == x1


def test_substitute_refuses_units():
    x1 = X(1, 4, 1)
    with pytest.raises(GermsumError):
        x1.substitute([1 + x1])
    assert (x1 * x1).substitute([1 + x1], certified=True) == 1 + 2 * x1 + x1 * x1


@given(series(dim=2, cap=5), series(dim=2, cap=5), series(dim=2, cap=5, const=False, max_terms=3), series(dim=2, cap=5, const=False, max_terms=3))
def test_substitute_is_ring_morphism(a, b, r1, r2):
    rules = [r1, r2]
    lhs = (a * b).substitute(rules)
    rhs = a.substitute(rules) * b.substitute(rules)
    assert lhs.equal_mod(rhs)


# invert -------------------------------------------------------------------------------
def test_invert_examples():
    x1 = X(1, 3, 1)
    assert (1 - x1).invert_unit() == MultiSeries(1, 3, {(0,): 1, (1,): 1, (2,): 1, (3,): 1})
    assert MultiSeries.constant(1, 3, 2).invert_unit() == MultiSeries.constant(1, 3, mpq(1, 2))
    u = 1 + X(2, 8, 1) * X(2, 8, 2)
    assert u * u.invert_unit() == MultiSeries.one(2, 8)
    with pytest.raises(NonUnitError):
        x1.invert_unit()


@given(series(dim=2, cap=6, const=False), st.integers(1, 5))
def test_invert_round_trip(f, c):
    u = f + c
    assert u * u.invert_unit() == MultiSeries.one(2, 6)


# monomial shifts ------------------------------------------------------------------------
def test_divide_examples():
    assert poly("x1^2*x2").divide_by_monomial((1, 0)) == MultiSeries(2, 2, {(1, 1): 1})
    x1x2 = X(2, 12, 1) * X(2, 12, 2)
    q = euler_compose(x1x2).divide_by_monomial((1, 1))
    for n in range(5):
        assert q.coefficient((n, n)) == (-1) ** n * math.factorial(n)
    with pytest.raises(DivisibilityError) as exc:
        poly("x1", dim=2).divide_by_monomial((0, 1))
    assert "(1, 0)" in str(exc.value)


@given(series(dim=2, cap=5), st.tuples(st.integers(0, 2), st.integers(0, 2)))
def test_divide_after_multiply_is_identity(f, gamma):
    assert f.multiply_by_monomial(gamma).divide_by_monomial(gamma) == f


# Euler series ------------------------------------------------------------------------
def test_euler_examples():
    E = euler_compose(X(1, 6, 1))
    assert E == MultiSeries(1, 6, {(1,): 1, (2,): -1, (3,): 2, (4,): -6, (5,): 24, (6,): -120})
    assert euler_compose(X(2, 8, 1) * X(2, 8, 2)).coefficient((3, 3)) == 2
    assert euler_compose(X(2, 4, 1) + X(2, 4, 2)).coefficient((1, 1)) == -2
    with pytest.raises(GermsumError):
        euler_compose(MultiSeries.zero(2, 4))


@given(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2)).filter(any))
def test_euler_ray_support(alpha):
    E = euler_compose(MultiSeries.monomial(3, 12, alpha))
    for e in E.terms:
        n = next(b // a for b, a in zip(e, alpha) if a)
        assert e == tuple(n * a for a in alpha) and n >= 1


# germs ----------------------------------------------------------------------------------
def test_germ_invariants():
    with pytest.raises(GermsumError):
        Germ(MultiSeries.one(2, 3))
    with pytest.raises(GermsumError):
        Germ(MultiSeries.zero(2, 3))
    g = Germ.polynomial(poly("x1*x2"))
    assert g.with_cap(6).cap == 6
    with pytest.raises(CertificationError):
        Germ(poly("x1*x2")).with_cap(6)


def test_to_expr_and_repr():
    f = poly("x1 - x1^2 + 2*x1^3")
    assert f.to_expr() == "x1 - x1^2 + 2*x1^3"
    assert poly("3/2*x1^3").to_expr() == "(3/2)*x1^3"
    assert poly("-I*x2").to_expr() == "-I*x2"
    assert repr(f).startswith("MultiSeries(dim=1, cap=3")
