"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import itertools
import json
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from conftest import random_series
from germsum import borel
from germsum.cli import run
from germsum.decompose import LinearForm, nu_ell, t_alpha, t_p_ell, weierstrass_divide
from germsum.errors import DegenerateOperatorError
from germsum.geometry import Couple, MonomialMap, Order, Pi, Ram, couple_compare, couple_equiv, order_couples
from germsum.gevrey import fit_monomial_gevrey, split_infeasibility, tauberian_verdict
from germsum.mseries import Germ, MultiSeries, euler_compose, exp_leq
from germsum.operators import build_L, euler_system_check, _factor_data, verify_two_euler
from germsum.polyexpr import parse_polynomial as poly
from germsum.polyexpr import parse_series

HALF_ONE_TWO = [Fraction(1, 2), Fraction(1), Fraction(2)]


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"

    return emit


# 1 -----------------------------------------------------------------------------------
def test_c01_decomposition_round_trip(report):
    rng = random.Random(1)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(200):
        d = rng.randint(1, 3)
        f = random_series(rng, d, 30, 0.05 if d == 3 else 0.3)
        alpha = tuple(rng.randint(0, 3) for _ in range(d))
        if not any(alpha):
            alpha = (1,) + alpha[1:]
        n_max = rng.randint(0, 30 // sum(alpha))
        dec = t_alpha(f, alpha, n_max)
        if dec.reconstruct() != f:
            bad += 1
    dt = time.perf_counter() - t0
    report(1, "t_alpha round trip, 200 instances, cap 30, d <= 3", bad == 0 and dt < 10, f"{bad} mismatches, {dt:.2f} s")


# 2 -----------------------------------------------------------------------------------
def test_c02_weierstrass_division(report):
    rng = random.Random(2)
    N = 20
    failures = []
    runs = 0
    while runs < 100:
        d = rng.randint(1, 3)
        P = random_series(rng, d, N, 0.04 if d > 1 else 0.2, const=False)
        if P.is_zero() or P.order() > 4:
            continue
        # degree-compatible weights perturbed to be injective on the box
        ell = LinearForm.degree_compatible(d, N)
        nu = nu_ell(P, ell)
        g = random_series(rng, d, N, 0.05 if d == 3 else 0.2)
        q, r = weierstrass_divide(g, P, ell)
        if not (q.as_polynomial(N) * P + r).equal_mod(g, N):
            failures.append(("identity", P, g))
        if any(exp_leq(nu, e) for e in r.terms):
            failures.append(("support", P, g))
        runs += 1
    # monomial P agrees with t_alpha componentwise
    mono = 0
    for _ in range(30):
        alpha = (rng.randint(0, 2), rng.randint(1, 2))
        f = random_series(rng, 2, N, 0.3)
        n_max = N // (2 * sum(alpha))
        a = t_alpha(f, alpha, n_max)
        b = t_p_ell(f, MultiSeries.monomial(2, N, alpha), LinearForm.degree_compatible(2, N), n_max)
        if not all(x.equal_mod(y, b.certified_cap) for x, y in zip(a.components, b.components)):
            failures.append(("monomial", alpha, f))
        mono += 1
    report(2, "Weierstrass division, 100 instances at cap 20 plus monomial agreement", not failures, f"{runs} divisions, {mono} monomial runs, {len(failures)} failures")


# 3 -----------------------------------------------------------------------------------
def brute_force_components(N: int) -> list:
    """Component n of the all-ones series: exponents b with min(b) == n, shifted by (n, n)."""
    comps = []
    for n in range(N // 2):
        terms = {}
        for b1 in range(N + 1):
            for b2 in range(N + 1 - b1):
                if min(b1, b2) == n:
                    terms[(b1 - n, b2 - n)] = 1
        comps.append(MultiSeries(2, N - 2 * n, terms))
    return comps


def test_c03_geometric_closed_form(report):
    N = 24
    geo = parse_series("G(x1)*G(x2)", cap=N)
    dec = t_alpha(geo, (1, 1))
    closed = parse_series("G(x1) + G(x2) - 1", cap=N)
    ok = all(c == closed.truncate(c.cap) for c in dec.components)
    ok = ok and dec.components == brute_force_components(N)
    report(3, "t_alpha of the two-variable geometric series", ok, f"{len(dec.components)} components")


# 4 -----------------------------------------------------------------------------------
def _replay(cs, res) -> bool:
    alphas = [list(c.alpha) for c in cs]
    ks = [c.k for c in cs]
    for t in res.trace:
        step = t.step
        if t.bound is not None:
            lo, hi = t.pair
            l, m = t.l - 1, t.m - 1
            bi = [ks[lo] * a for a in alphas[lo]]
            bj = [ks[hi] * a for a in alphas[hi]]
            want = Fraction(bi[m] - bj[m]) / (bj[l] - bi[l])
            if want != t.bound or step.n != math.floor(want) + 1 or (step.i, step.j) != (t.m, t.l):
                return False
        for a in alphas:
            a[step.i - 1] += step.n * a[step.j - 1]
    return [list(c.alpha) for c in res.images] == alphas


def test_c04_ordering_algorithm(report):
    t0 = time.perf_counter()
    grid = [Couple(a, k) for a in itertools.product(range(5), repeat=2) if any(a) for k in HALF_ONE_TWO]
    pairs = bad = 0
    for x, y in itertools.combinations(grid, 2):
        if couple_equiv(x, y):
            continue
        pairs += 1
        res = order_couples([x, y])
        imgs = res.images
        ok = all(v >= 1 for c in imgs for v in c.alpha)
        lo, hi = (imgs[i] for i in res.permutation)
        ok = ok and couple_compare(lo, hi) is Order.STRICT_LT
        ok = ok and _replay([x, y], res)
        ok = ok and [res.word.pullback_couple(c) for c in (x, y)] == imgs
        bad += not ok
    dt = time.perf_counter() - t0
    report(4, "order_couples on the exhaustive grid", bad == 0 and dt < 5, f"{pairs} pairs, {bad} failures, {dt:.2f} s")


# 5 -----------------------------------------------------------------------------------
def test_c05_gevrey_estimation(report):
    E = euler_compose(poly("x1*x2", cap=60))
    s_e = fit_monomial_gevrey(E, (1, 1)).s
    conv = [parse_series(t, cap=40) for t in ("G(x1 + x2)", "G(x1*x2)", "G(x1)*G(x2)", "G(2*x1 + x2)")]
    s_c = [fit_monomial_gevrey(f, (1, 1)).s for f in conv]
    worst = 0.0
    for alpha in [(1, 1), (1, 2), (2, 1), (2, 3)]:
        f = euler_compose(MultiSeries.monomial(2, 60, alpha))
        s1 = fit_monomial_gevrey(f, alpha).s
        for N in (1, 2, 3):
            worst = max(worst, abs(fit_monomial_gevrey(f, tuple(N * a for a in alpha)).s - N * s1))
    ok = 0.9 <= s_e <= 1.1 and all(-0.1 <= s <= 0.1 for s in s_c) and worst <= 0.15
    report(5, "Gevrey estimation", ok, f"s(E)={s_e:.4f}, convergent s in [{min(s_c):.3f}, {max(s_c):.3f}], power gap {worst:.3g}")


# 6 -----------------------------------------------------------------------------------
def test_c06_tauberian_verdict(report, tmp_path, capsys):
    from germsum.formats import dumps_series

    E = euler_compose(poly("x1*x2", cap=60))
    one = tauberian_verdict(E, [Couple((1, 1), 1)])
    line_ok = one.lines[0].startswith("divergent, Gevrey ≈ 1.0") and one.lines[0].endswith("w.r.t. (1,1)")
    path = tmp_path / "e.json"
    path.write_text(dumps_series(E))
    two = ["--couple", "alpha=[1,1] k=1", "--couple", "alpha=[1,2] k=1"]
    code_div = run(["tauberian-verdict", "--series-file", str(path), *two])
    out_div = json.loads(capsys.readouterr().out)
    code_conv = run(["tauberian-verdict", "--expr", "G(x1*x2)", "--cap", "60", *two])
    out_conv = json.loads(capsys.readouterr().out)
    implication = any("forced convergent; check radius" in s for s in out_div["lines"])
    ok = line_ok and implication and code_div == 1 and out_div["result"] == "FAIL" and code_conv == 0 and out_conv["result"] == "PASS"
    report(6, "tauberian verdict pipeline", ok, f"'{one.lines[0]}', exits {code_div}/{code_conv}")


# 7 -----------------------------------------------------------------------------------
def test_c07_product_infeasibility(report):
    t0 = time.perf_counter()
    prod = parse_series("E(x1)*E(x2)", cap=60)
    total = parse_series("E(x1) + E(x2)", cap=60)
    a = split_infeasibility(prod, (1, 30))
    b = split_infeasibility(total, (1, 30))
    dt = time.perf_counter() - t0
    ok = a.verdict == "INFEASIBLE" and b.verdict == "FEASIBLE" and dt < 2
    report(7, "product infeasibility", ok, f"{a.verdict}/{b.verdict}, {dt:.2f} s")


# 8 -----------------------------------------------------------------------------------
def test_c08_borel_laplace_cross_oracle(report):
    ts = [0.05, 0.1, 0.2]
    g = borel.ContinuationHandle.closed_form("log1p")
    rep = borel.laplace_sum(g, 1, 0.0, ts)
    E = borel.euler_one_var(80)
    quad_gap = 0.0
    duality = True
    for t, s in zip(ts, rep.samples):
        oracle, _ = integrate.quad(lambda xi: math.exp(-xi / t) / (1 + xi), 0, np.inf, epsabs=1e-14, epsrel=1e-13)
        quad_gap = max(quad_gap, abs(float(s.value.real) - oracle))
        val, err = borel.optimal_truncation(E, t)
        duality = duality and abs(val - s.value) <= err + s.est_error
    ode = borel.euler_ode_residual([0.01, 0.02, 0.05, 0.1, 0.15, 0.2])
    ok = quad_gap < 1e-8 and duality and ode < 1e-6
    report(8, "Borel-Laplace cross-oracle", ok, f"quadrature gap {quad_gap:.2e}, ODE residual {ode:.2e}")


# 9 -----------------------------------------------------------------------------------
def test_c09_remainder_certification(report):
    P = poly("x1*x2", cap=26)
    dec = t_p_ell(euler_compose(P), P, LinearForm([1, Fraction(3, 2)]), 13)
    pts = [[r, r] for r in np.geomspace(math.sqrt(1e-3), math.sqrt(1e-1), 8)]
    vals = borel.germ_sum_values(borel.ContinuationHandle.closed_form("log1p"), 1, P, pts, dps=40)
    right = borel.remainder_check(vals, dec, P, 1, pts, (3, 12), dps=40)
    wrong = borel.remainder_check(vals, dec, P, 0, pts, (3, 12), dps=40)
    ok = right.status == "CERTIFIED" and right.residual < 0.5 and wrong.status == "NOT_CERTIFIED"
    report(9, "remainder certification", ok, f"s=1 residual {right.residual:.3f}, s=0 {wrong.status}")


# 10 ----------------------------------------------------------------------------------
def small_poly(rng: random.Random) -> MultiSeries:
    """One to three terms of degree <= 2 per variable, integer coefficients in -2..2."""
    terms: dict = {}
    for _ in range(rng.randint(1, 3)):
        e = (rng.randint(0, 2), rng.randint(0, 2))
        if any(e):
            terms[e] = terms.get(e, 0) + rng.choice([-2, -1, 1, 2])
    return MultiSeries(2, 4, terms)


def test_c10_operator_example(report):
    t0 = time.perf_counter()
    sys_ok = all(
        euler_system_check(Germ.polynomial(poly(P, dim=2)), j, cap)
        for P, cap in (("x1*x2", 20), ("x1^2 + x2^3", 24))
        for j in (1, 2)
    )
    flagship = verify_two_euler(poly("x1", dim=2), poly("x2", dim=2), 1, 16)
    rng = random.Random(10)
    passed = tried = 0
    c_sides = True
    while tried < 20:
        P, Q = small_poly(rng), small_poly(rng)
        if P.is_zero() or Q.is_zero():
            continue
        j = rng.randint(1, 2)
        try:
            op = build_L(P, Q, j)
        except DegenerateOperatorError:
            continue
        tried += 1
        D = op.work_cap
        CP = _factor_data(op.A, op.B, P.as_polynomial(D), j)[2]
        CQ = _factor_data(op.A, op.B, Q.as_polynomial(D), j)[2]
        c_sides = c_sides and CP == CQ == op.C
        passed += verify_two_euler(P, Q, j, 16)
    dt = time.perf_counter() - t0
    ok = sys_ok and flagship and passed == 20 and c_sides and dt < 60
    report(10, "operator example end to end", ok, f"{passed}/20 random pairs, {dt:.2f} s")


# 11 ----------------------------------------------------------------------------------
def test_c11_pullback_invariance(report):
    grid = [Couple(a, k) for a in itertools.product(range(3), repeat=2) if any(a) for k in HALF_ONE_TWO]
    steps = [Pi(1, 2), Pi(2, 1), Ram(1, 2), Ram(2, 2), Ram(1, 3), Pi(1, 2, 2)]
    words = [MonomialMap(2, w) for n in range(4) for w in itertools.product(steps, repeat=n)]
    broken = 0
    for w in words:
        imgs = {c: w.pullback_couple(c) for c in grid}
        for x, y in itertools.product(grid, repeat=2):
            before = couple_compare(x, y)
            after = couple_compare(imgs[x], imgs[y])
            if couple_equiv(x, y) != couple_equiv(imgs[x], imgs[y]) and before is Order.EQ:
                broken += 1
            if before in (Order.LT, Order.STRICT_LT) and after not in (Order.EQ, Order.LT, Order.STRICT_LT):
                broken += 1
            if before in (Order.GT, Order.STRICT_GT) and after not in (Order.EQ, Order.GT, Order.STRICT_GT):
                broken += 1
            if before is Order.EQ and after is not Order.EQ:
                broken += 1
    rng = random.Random(11)
    mult_bad = 0
    for _ in range(100):
        f, g = random_series(rng, 2, 6, 0.4), random_series(rng, 2, 6, 0.4)
        w = MonomialMap(2, tuple(rng.choice(steps) for _ in range(rng.randint(0, 3))))
        mult_bad += not w.pullback_series(f * g).equal_mod(w.pullback_series(f) * w.pullback_series(g))
    ok = broken == 0 and mult_bad == 0
    report(11, "pullback invariance suite", ok, f"{len(words)} words, {broken} order violations, {mult_bad} product mismatches")
