from __future__ import annotations

import dataclasses
import random

import pytest
from hypothesis import given

from conftest import series
from germsum.errors import (
    CertificationError,
    DegenerateOperatorError,
    DimensionError,
    DivisibilityError,
    GermsumError,
)
from germsum.mseries import Germ, MultiSeries, euler_compose
from germsum.operators import (
    SkewOperator,
    _factor_data,
    apply,
    build_L,
    euler_operator,
    euler_system_check,
    homogeneous_order,
    poly_divide_exact,
    two_euler_report,
    verify_two_euler,
)
from germsum.polyexpr import parse_polynomial


def poly(text, dim=2, cap=None):
    return parse_polynomial(text, dim=dim, cap=cap)


def random_poly(rng: random.Random, dim=2, deg=2, const=False):
    terms = {}
    for _ in range(rng.randint(1, 3)):
        e = tuple(rng.randint(0, deg) for _ in range(dim))
        if sum(e) == 0 and not const:
            continue
        c = rng.choice([-2, -1, 1, 2])
        terms[e] = terms.get(e, 0) + c
    return MultiSeries(dim, max([sum(e) for e in terms] + [1]), terms)


# skew operators -------------------------------------------------------------------------
def test_apply_examples():
    d = SkewOperator.derivation(2, 1, 6)
    assert apply(d, poly("x1^2", cap=6)) == poly("2*x1", cap=5)
    f = poly("x1 + x2^2", cap=6)
    y = poly("1 + x1*x2", cap=6)
    assert SkewOperator.multiplication(f, 2).apply(y) == f * y
    x1x2 = poly("x1*x2", cap=20)
    L = euler_operator(x1x2, 1, 20)
    got = L(euler_compose(x1x2))
    want = x1x2.derive(1) * x1x2
    assert got.equal_mod(want, 19)
    with pytest.raises(DimensionError):
        SkewOperator.derivation(2, 3, 4)


@given(series(dim=2, cap=6), series(dim=2, cap=6))
def test_skew_leibniz(f, y):
    d = SkewOperator.derivation(2, 1, 6)
    comp = d @ SkewOperator.multiplication(f, 1)
    lhs = comp.apply(y)
    rhs = f * y.derive(1) + f.derive(1) * y
    assert lhs.equal_mod(rhs, 5)


def test_composition_order_and_sum():
    f = poly("x1 + x2", cap=8)
    L2 = SkewOperator(2, 1, {2: f, 1: f * f})
    M = SkewOperator(2, 1, {1: f, 0: MultiSeries.one(2, 8)})
    y = poly("x1^3*x2 + x1^2", cap=8)
    assert (M @ L2).order == 3
    assert (M @ L2).apply(y).equal_mod(M.apply(L2.apply(y)), 5)
    assert (M + L2).apply(y).equal_mod(M.apply(y) + L2.apply(y), 6)
    with pytest.raises(DimensionError):
        M + SkewOperator.derivation(2, 2, 8)


# exact division -----------------------------------------------------------------------
def test_poly_divide_exact(rng):
    for _ in range(30):
        a = random_poly(rng, const=True)
        b = random_poly(rng, const=True)
        if a.is_zero() or b.is_zero():
            continue
        D = 12
        prod = a.as_polynomial(D) * b.as_polynomial(D)
        assert poly_divide_exact(prod, b.as_polynomial(D)).equal_mod(a, D)
    with pytest.raises(DivisibilityError):
        poly_divide_exact(poly("x1 + 1", cap=4), poly("x2", cap=4))


# Euler system ------------------------------------------------------------------------
@pytest.mark.parametrize("P, j, cap", [("x1*x2", 1, 20), ("x1*x2", 2, 20), ("x1^2 + x2^3", 1, 24), ("x1^2 + x2^3", 2, 24)])
def test_euler_system_passes(P, j, cap):
    assert euler_system_check(Germ.polynomial(poly(P)), j, cap)


def test_euler_system_rejects():
    P = Germ.polynomial(poly("x1*x2"))
    assert not euler_system_check(P, 1, 20, y=MultiSeries.zero(2, 20))
    wrong = euler_compose(poly("x1*x2", cap=20)) + poly("x1^3", cap=20)
    assert not euler_system_check(P, 1, 20, y=wrong)
    with pytest.raises(CertificationError):
        euler_system_check(Germ.polynomial(poly("x1^2 + x2^3")), 1, 10)
    with pytest.raises(GermsumError):
        euler_system_check(Germ(euler_compose(poly("x1", cap=6))), 1)


# two-germ operator ----------------------------------------------------------------------
def test_build_L_examples():
    op = build_L(poly("x1"), poly("x2"), 1)
    assert op.A.equal_mod(poly("x1^2*x2^4"), op.work_cap)
    with pytest.raises(DegenerateOperatorError):
        build_L(poly("x1*x2"), poly("x1*x2"), 1)
    a = build_L(poly("x1 + x2^2"), poly("x1*x2 + x1^2"), 1)
    b = build_L(poly("x1*x2 + x1^2"), poly("x1 + x2^2"), 1)
    assert (a.A + b.A).is_zero()


def test_unit_multiple_is_not_degenerate():
    P = poly("x1*x2 + x2^2")
    Q = poly("(x1*x2 + x2^2)*(1 + x1)")
    op = build_L(P, Q, 1)
    assert not op.A.is_zero()


def test_C_agrees_from_both_sides():
    for P, Q in [("x1", "x2"), ("x1*x2", "x1^2*x2"), ("x1 + x2^2", "x1*x2 + x1^2")]:
        op = build_L(poly(P), poly(Q), 1)
        _, _, CP = _factor_data(op.A, op.B, poly(P).as_polynomial(op.work_cap), 1)
        _, _, CQ = _factor_data(op.A, op.B, poly(Q).as_polynomial(op.work_cap), 1)
        assert CP == CQ == op.C


def test_verify_two_euler_examples():
    assert verify_two_euler(poly("x1"), poly("x2"), 1, 16)
    assert verify_two_euler(poly("x1"), poly("x2"), 2, 16)
    assert verify_two_euler(poly("x1*x2"), poly("x1^2*x2"), 1, 18)
    rep = two_euler_report(poly("x1"), poly("x2"), 1, 16)
    assert rep.passed and rep.compared_up_to == 14
    assert rep.homogeneous_N == homogeneous_order(build_L(poly("x1"), poly("x2"), 1).rhs, 1)


def test_corrupted_rhs_is_detected():
    op = build_L(poly("x1"), poly("x2"), 1)
    bad = dataclasses.replace(op, rhs=op.rhs + 1)
    assert not two_euler_report(poly("x1"), poly("x2"), 1, 16, op=bad).passed


def test_literal_B_display_fails_divisibility():
    # the variant with Q'' multiplied outside the bracket does not factor through P^2
    P = poly("x1 + x2^2").as_polynomial(40)
    Q = poly("x1*x2 + x1^2").as_polynomial(40)
    op = build_L(P, Q, 1)
    dP, dQ = P.derive(1).as_polynomial(40), Q.derive(1).as_polynomial(40)
    ddP, ddQ = dP.derive(1).as_polynomial(40), dQ.derive(1).as_polynomial(40)
    P2, Q2 = P * P, Q * Q
    literal = Q2 * Q2 * ((2 * P + 1) * dP * dP - P2 * ddP) - P2 * P2 * ((2 * Q + 1) * dQ * dQ - ddQ) * Q2
    assert literal != op.B
    with pytest.raises(GermsumError):
        cp = _factor_data(op.A, literal, P, 1)[2]
        cq = _factor_data(op.A, literal, Q, 1)[2]
        if cp != cq:
            raise GermsumError("sides disagree")


def test_random_pairs():
    rng = random.Random(20240611)
    done = 0
    while done < 20:
        P, Q = random_poly(rng), random_poly(rng)
        if P.is_zero() or Q.is_zero():
            continue
        j = rng.randint(1, 2)
        try:
            build_L(P, Q, j)
        except DegenerateOperatorError:
            continue
        assert verify_two_euler(P, Q, j, 12)
        done += 1
