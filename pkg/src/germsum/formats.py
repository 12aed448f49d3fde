"""JSON text format for series.

    {"dim": d, "cap": N, "terms": [{"exp": [b1, ..., bd], "re": "p/q", "im": "p/q"}, ...]}

Rationals are decimal-free strings.  Terms are written in graded-lex order
with the denominator always present, so emitted documents are byte-stable.
"""

from __future__ import annotations

import json

from germsum.coeffs import format_rational, gauss, parse_rational, re_im
from germsum.errors import ParseError
from germsum.mseries import MultiSeries


def series_to_obj(f: MultiSeries) -> dict:
    terms = []
    for e, c in f.items_sorted():
        re_, im_ = re_im(c)
        terms.append({"exp": list(e), "re": format_rational(re_), "im": format_rational(im_)})
    return {"dim": f.dim, "cap": f.cap, "terms": terms}


def dumps_series(f: MultiSeries, indent: int | None = None) -> str:
    return json.dumps(series_to_obj(f), indent=indent)


def _nat(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ParseError(f"{what} must be a natural number, got {v!r}")
    return v


def series_from_obj(obj) -> MultiSeries:
    if not isinstance(obj, dict):
        raise ParseError("series document must be a JSON object")
    for key in ("dim", "cap", "terms"):
        if key not in obj:
            raise ParseError(f"series document lacks {key!r}")
    dim = _nat(obj["dim"], "dim")
    if dim < 1:
        raise ParseError("dim must be >= 1")
    cap = _nat(obj["cap"], "cap")
    if not isinstance(obj["terms"], list):
        raise ParseError("'terms' must be a list")
    terms = {}
    for idx, t in enumerate(obj["terms"]):
        if not isinstance(t, dict) or "exp" not in t or "re" not in t:
            raise ParseError(f"term #{idx} needs 'exp' and 're'")
        exp = t["exp"]
        if not isinstance(exp, list) or len(exp) != dim:
            raise ParseError(f"term #{idx}: exponent must be a list of {dim} naturals")
        e = tuple(_nat(v, f"term #{idx} exponent entry") for v in exp)
        if sum(e) > cap:
            raise ParseError(f"term #{idx}: exponent {list(e)} exceeds cap {cap}")
        if e in terms:
            raise ParseError(f"term #{idx}: duplicate exponent {list(e)}")
        c = gauss(parse_rational(t["re"]), parse_rational(t.get("im", "0")))
        if c == 0:
            raise ParseError(f"term #{idx}: zero coefficients are not allowed")
        terms[e] = c
    return MultiSeries(dim, cap, terms)


def loads_json(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno} (offset {exc.pos}): {exc.msg}") from None


def loads_series(text: str, source: str = "<input>") -> MultiSeries:
    return series_from_obj(loads_json(text, source))
