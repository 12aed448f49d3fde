from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import series
from germsum.errors import GermsumError, ParseError
from germsum.geometry import (
    Couple,
    GermCouple,
    MonomialMap,
    Order,
    Pi,
    Ram,
    blowup_chart,
    convergence_transport_check,
    couple_compare,
    couple_equiv,
    germ_couple_equiv,
    order_couples,
    parse_couple,
    parse_word,
    ramify,
)
from germsum.gevrey import Kind
from germsum.mseries import Germ, MultiSeries, euler_compose, geometric_in
from germsum.polyexpr import parse_polynomial as poly

K = [Fraction(1, 2), Fraction(1), Fraction(2)]


def C(a, k=1):
    return Couple(tuple(a), Fraction(k))


def grid(dim=2, top=2, ks=K):
    for a in itertools.product(range(top + 1), repeat=dim):
        if any(a):
            for k in ks:
                yield C(a, k)


# couples -------------------------------------------------------------------------------
def test_couple_examples():
    assert couple_equiv(C((1, 2), 2), C((2, 4), 1))
    assert not couple_equiv(C((1, 0)), C((0, 1)))
    assert couple_equiv(C((3, 6), Fraction(1, 3)), C((1, 2)))
    assert couple_compare(C((1, 1)), C((2, 2))) is Order.STRICT_LT
    assert couple_compare(C((1, 3)), C((2, 1))) is Order.INCOMPARABLE
    assert couple_compare(C((1, 2)), C((2, 4), Fraction(1, 2))) is Order.EQ
    assert couple_compare(C((1, 2)), C((1, 3))) is Order.LT
    assert couple_compare(C((2, 3)), C((1, 2))) is Order.STRICT_GT


def test_couple_validation_and_parse():
    with pytest.raises(GermsumError):
        C((0, 0))
    with pytest.raises(GermsumError):
        C((1, 0), 0)
    assert parse_couple("alpha=[1,3] k=2/3") == C((1, 3), Fraction(2, 3))
    assert parse_couple("alpha=[2,1]") == C((2, 1))
    assert str(C((1, 3), 2)) == "alpha=[1,3] k=2"
    with pytest.raises(ParseError):
        parse_couple("alpha=(1,3)")


couples3 = st.builds(
    lambda a, k: C(a, k),
    st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(any),
    st.sampled_from(K + [Fraction(3), Fraction(1, 3)]),
)


@given(couples3, couples3, couples3)
def test_equivalence_relation(a, b, c):
    assert couple_equiv(a, a)
    assert couple_equiv(a, b) == couple_equiv(b, a)
    if couple_equiv(a, b) and couple_equiv(b, c):
        assert couple_equiv(a, c)


def test_strict_order_matches_max_ratio_criterion():
    ks = [Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3)]
    for a in grid(2, 5, ks):
        for b in grid(2, 5, ks):
            if all(b.alpha):
                ratio = max(Fraction(x, y) for x, y in zip(a.alpha, b.alpha))
                assert (couple_compare(a, b) is Order.STRICT_LT) == (ratio < b.k / a.k)


# monomial maps ------------------------------------------------------------------------------
def test_pullback_couple_examples():
    c = C((1, 2), 3)
    assert MonomialMap(2, (Pi(1, 2),)).pullback_couple(c) == C((3, 2), 3)
    assert MonomialMap(2, (Ram(1, 3),)).pullback_couple(c) == C((3, 2), 3)
    assert MonomialMap(2).pullback_couple(c) == c
    # repetitions recompute alpha_j each time (it does not change for Pi(i, j))
    assert MonomialMap(2, (Pi(2, 1, 3),)).pullback_couple(C((1, 3))) == C((1, 6))


def test_parse_word():
    w = parse_word("pi(2,1)^3 ; ram(1,2)", 2)
    assert w.steps == (Pi(2, 1, 3), Ram(1, 2))
    assert str(w) == "pi(2,1)^3 ; ram(1,2)"
    assert parse_word("", 2).steps == ()
    for bad in ["pi(1,1)", "pi(1,3)", "blow(1,2)"]:
        with pytest.raises(ParseError):
            parse_word(bad, 2)


def test_pullback_series_examples():
    f = MultiSeries(2, 8, {(1, 2): 1})
    assert MonomialMap(2, (Pi(1, 2),)).pullback_series(f) == MultiSeries(2, 8, {(3, 2): 1})
    assert ramify(poly("x1 + x2", cap=4), 1, 2) == poly("x1^2 + x2", cap=4)
    assert MonomialMap(2).pullback_series(f) == f


def test_pullback_series_matches_exponent_map():
    w = parse_word("pi(1,2)^2 ; ram(2,3) ; pi(2,1)", 2)
    for e in [(1, 0), (0, 1), (2, 1), (1, 3)]:
        f = MultiSeries.monomial(2, 60, e)
        assert dict(w.pullback_series(f).terms) == {w.pullback_exponent(e): 1}


def test_blowup_examples():
    f = poly("x1*x2", cap=6)
    assert blowup_chart(f, 0) == MultiSeries(2, 6, {(1, 2): 1})
    assert blowup_chart(f, "inf") == MultiSeries(2, 6, {(1, 2): 1})
    assert blowup_chart(poly("x1", dim=2, cap=4), 1) == MultiSeries(2, 4, {(0, 1): 1})


WORD_STEPS = [Pi(1, 2), Pi(2, 1), Ram(1, 2), Ram(2, 2), Pi(1, 2, 2)]


def all_words(max_len=3):
    for n in range(max_len + 1):
        for steps in itertools.product(WORD_STEPS, repeat=n):
            yield MonomialMap(2, steps)


def test_pullback_preserves_equivalence_and_order():
    cs = list(grid(2, 2))
    words = list(all_words(3))
    pairs = [(a, b) for a in cs for b in cs if couple_compare(a, b) is not Order.INCOMPARABLE]
    for w in words:
        for a, b in pairs:
            before = couple_compare(a, b)
            after = couple_compare(w.pullback_couple(a), w.pullback_couple(b))
            if before is Order.EQ:
                assert after is Order.EQ
            elif before in (Order.LT, Order.STRICT_LT):
                assert after in (Order.EQ, Order.LT, Order.STRICT_LT)
            else:
                assert after in (Order.EQ, Order.GT, Order.STRICT_GT)


@given(series(dim=2, cap=5), series(dim=2, cap=5), st.lists(st.sampled_from(WORD_STEPS), max_size=3))
def test_pullback_series_multiplicative(f, g, steps):
    w = MonomialMap(2, tuple(steps))
    assert w.pullback_series(f * g).equal_mod(w.pullback_series(f) * w.pullback_series(g))


# ordering algorithm ------------------------------------------------------------------------
def check_ordered(res):
    images = res.images
    for c in images:
        assert all(a >= 1 for a in c.alpha)
    order = [images[i] for i in res.permutation]
    for a, b in zip(order, order[1:]):
        assert couple_compare(a, b) is Order.STRICT_LT


def test_order_couples_example():
    res = order_couples([C((1, 3)), C((2, 1))])
    assert str(res.word) == "pi(2,1)^3"
    assert res.images == [C((1, 6)), C((2, 7))]
    assert res.trace[0].bound == 2
    check_ordered(res)


def test_order_couples_already_ordered():
    res = order_couples([C((1, 1)), C((2, 2))])
    assert res.word.steps == () and res.permutation == [0, 1]


def test_order_couples_zero_entries_brute_force():
    cs = [C((1, 0)), C((0, 1))]
    res = order_couples(cs)
    check_ordered(res)
    # the word is a pullback: replaying it on the inputs gives the images
    assert [res.word.pullback_couple(c) for c in cs] == res.images
    # a short word with the output property exists, confirming the target is reachable
    found = any(
        all(all(x >= 1 for x in w.pullback_couple(c).alpha) for c in cs)
        and couple_compare(w.pullback_couple(cs[0]), w.pullback_couple(cs[1])) in (Order.STRICT_LT, Order.STRICT_GT)
        for w in all_words(3)
    )
    assert found


def test_order_couples_three_couples():
    cs = [C((1, 3)), C((2, 1)), C((3, 2), Fraction(1, 2)), C((0, 2), 2)]
    res = order_couples(cs)
    check_ordered(res)
    assert [res.word.pullback_couple(c) for c in cs] == res.images


def test_order_couples_rejects_equivalent():
    with pytest.raises(GermsumError):
        order_couples([C((1, 2), 2), C((2, 4))])


# germ couples ----------------------------------------------------------------------------------
def G(text, cap=None):
    return Germ.polynomial(poly(text, dim=2, cap=cap))


def test_germ_couple_examples():
    r = germ_couple_equiv(GermCouple(G("x1*x2"), 1), GermCouple(G("x1^2*x2^2"), Fraction(1, 2)))
    assert r.equivalent and r.exact and r.unit == MultiSeries.one(2, r.unit.cap)
    r = germ_couple_equiv(GermCouple(G("x1*x2"), 1), GermCouple(G("x1*x2 + x1^2*x2"), 1))
    assert r.equivalent and r.exact
    assert r.unit.truncate(1) == poly("1 + x1", dim=2, cap=1)
    assert not germ_couple_equiv(GermCouple(G("x1"), 1), GermCouple(G("x2"), 1))


def test_germ_couple_truncated_is_qualified():
    P = Germ(euler_compose(poly("x1*x2", cap=10)))
    Q = Germ(poly("x1*x2", cap=10))
    r = germ_couple_equiv(GermCouple(P, 1), GermCouple(Q, 1))
    assert r.equivalent and not r.exact and "mod degree" in r.qualifier


def test_germ_couple_agrees_with_monomial_case():
    cs = [c for c in grid(2, 2, [Fraction(1), Fraction(2), Fraction(1, 2)])]
    for a in cs:
        for b in cs:
            Pa = Germ.polynomial(MultiSeries.monomial(2, sum(a.alpha), a.alpha))
            Pb = Germ.polynomial(MultiSeries.monomial(2, sum(b.alpha), b.alpha))
            got = germ_couple_equiv(GermCouple(Pa, a.k), GermCouple(Pb, b.k)).equivalent
            assert got == couple_equiv(a, b), (a, b)


# convergence transport -----------------------------------------------------------------------
def test_convergence_transport():
    x1x2 = poly("x1*x2", cap=60)
    rep = convergence_transport_check(geometric_in(x1x2) - 1)
    assert rep.agree and all(v.kind is Kind.CONVERGENT for v in rep.verdicts.values())
    rep = convergence_transport_check(euler_compose(x1x2))
    assert rep.agree and all(v.kind is Kind.DIVERGENT_GEVREY for v in rep.verdicts.values())
    rep = convergence_transport_check(MultiSeries.zero(2, 20))
    assert rep.agree and all(v.kind is Kind.CONVERGENT for v in rep.verdicts.values())
