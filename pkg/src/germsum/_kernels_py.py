"""Pure-Python reference kernels.

These define the contract the compiled ``_kernels`` module must match
term-for-term.  Term maps are plain dicts from exponent tuples to ring
elements (``gmpy2.mpq`` or :class:`~germsum.coeffs.GaussRational`).
"""

from __future__ import annotations

from bisect import bisect_right


def mul_terms(a: dict, b: dict, dim: int, cap: int) -> dict:
    """Truncated Cauchy product: keep exponents with total degree <= cap."""
    if len(a) > len(b):
        a, b = b, a
    rows = sorted(((sum(e), e, c) for e, c in b.items()), key=lambda t: t[0])
    degs = [r[0] for r in rows]
    out: dict = {}
    get = out.get
    for ea, ca in a.items():
        room = cap - sum(ea)
        if room < 0:
            continue
        for k in range(bisect_right(degs, room)):
            _, eb, cb = rows[k]
            e = tuple([x + y for x, y in zip(ea, eb)])
            prev = get(e)
            out[e] = ca * cb if prev is None else prev + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def addmul_shifted(acc: dict, src: dict, coef, shift: tuple, cap: int) -> None:
    """In place: ``acc += coef * x**shift * src``, truncated at ``cap``."""
    room = cap - sum(shift)
    if room < 0:
        return
    for e, c in src.items():
        if sum(e) > room:
            continue
        key = tuple([x + y for x, y in zip(e, shift)])
        prev = acc.get(key)
        val = coef * c if prev is None else prev + coef * c
        if val == 0:
            acc.pop(key, None)
        else:
            acc[key] = val
