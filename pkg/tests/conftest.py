from __future__ import annotations

import itertools
import random

import pytest
from gmpy2 import mpq
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from germsum.mseries import MultiSeries

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


# brute-force oracles ------------------------------------------------------------
def dense_product(a: MultiSeries, b: MultiSeries) -> dict:
    """Cauchy product by the double loop, no kernels involved."""
    cap = min(a.cap, b.cap)
    out: dict = {}
    for ea, ca in a.terms.items():
        for eb, cb in b.terms.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            if sum(e) <= cap:
                out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def all_exponents(dim: int, cap: int):
    for e in itertools.product(range(cap + 1), repeat=dim):
        if sum(e) <= cap:
            yield e


def random_series(rng: random.Random, dim: int, cap: int, density: float = 0.4, const: bool = True, lo: int = -5, hi: int = 5) -> MultiSeries:
    terms = {}
    for e in all_exponents(dim, cap):
        if not const and sum(e) == 0:
            continue
        if rng.random() < density:
            c = mpq(rng.randint(lo, hi), rng.randint(1, 4))
            if c:
                terms[e] = c
    return MultiSeries(dim, cap, terms)


# hypothesis strategies ------------------------------------------------------------
rationals = st.builds(lambda p, q: mpq(p, q), st.integers(-6, 6), st.integers(1, 5))


@st.composite
def series(draw, dim=None, cap=None, const=True, max_terms=8):
    d = draw(st.integers(1, 3)) if dim is None else dim
    n = draw(st.integers(0, 6)) if cap is None else cap
    exps = [e for e in all_exponents(d, n) if const or sum(e) > 0]
    if not exps:
        return MultiSeries.zero(d, n)
    chosen = draw(st.lists(st.sampled_from(exps), max_size=max_terms, unique=True))
    coeffs = draw(st.lists(rationals, min_size=len(chosen), max_size=len(chosen)))
    return MultiSeries(d, n, dict(zip(chosen, coeffs)))


@pytest.fixture
def rng():
    return random.Random(20241016)
