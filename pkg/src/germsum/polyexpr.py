"""A small polynomial expression grammar for germ inputs.

Accepted: integers, variables ``x1 .. xd``, the imaginary unit ``I``,
``+ - *``, division by a nonzero constant, powers ``^`` or ``**`` with a
natural exponent, and parentheses.  Example: ``"x1*x2 + 3/2*x1^3 - I*x2"``.
"""

from __future__ import annotations

import ast
import re

from gmpy2 import mpq

from germsum import kernels
from germsum.coeffs import I, coerce
from germsum.errors import ParseError
from germsum.mseries import MultiSeries

_VAR = re.compile(r"^x([1-9]\d*)$")


class _Poly:
    """Exact untruncated polynomial used only while evaluating the parse tree."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict):
        self.terms = {e: c for e, c in terms.items() if c != 0}

    def deg(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def const(self):
        if any(sum(e) for e in self.terms):
            return None
        return next(iter(self.terms.values()), mpq(0))


def _pad(p: _Poly, dim: int) -> dict:
    return {e + (0,) * (dim - len(e)): c for e, c in p.terms.items()}


class _Evaluator:
    def __init__(self, dim: int):
        self.dim = dim

    def const(self, c) -> _Poly:
        return _Poly({(0,) * self.dim: coerce(c)})

    def add(self, a: _Poly, b: _Poly, sign=1) -> _Poly:
        out = dict(a.terms)
        kernels.addmul_shifted(out, b.terms, sign, (0,) * self.dim, a.deg() + b.deg() + 1)
        return _Poly(out)

    def mul(self, a: _Poly, b: _Poly) -> _Poly:
        return _Poly(kernels.mul_terms(a.terms, b.terms, self.dim, a.deg() + b.deg()))

    def visit(self, node) -> _Poly:
        if isinstance(node, ast.Expression):
            return self.visit(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise ParseError(f"only integer literals are allowed, got {node.value!r}")
            return self.const(node.value)
        if isinstance(node, ast.Name):
            if node.id == "I":
                return self.const(I)
            m = _VAR.match(node.id)
            if not m:
                raise ParseError(f"unknown name {node.id!r} (use x1, x2, ... or I)")
            j = int(m.group(1))
            if j > self.dim:
                raise ParseError(f"variable {node.id} exceeds dimension {self.dim}")
            e = [0] * self.dim
            e[j - 1] = 1
            return _Poly({tuple(e): mpq(1)})
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            p = self.visit(node.operand)
            if isinstance(node.op, ast.USub):
                return _Poly({e: -c for e, c in p.terms.items()})
            return p
        if isinstance(node, ast.BinOp):
            a = self.visit(node.left)
            b = self.visit(node.right)
            if isinstance(node.op, ast.Add):
                return self.add(a, b)
            if isinstance(node.op, ast.Sub):
                return self.add(a, b, -1)
            if isinstance(node.op, ast.Mult):
                return self.mul(a, b)
            if isinstance(node.op, ast.Div):
                c = b.const()
                if c is None or c == 0:
                    raise ParseError("division is only allowed by a nonzero constant")
                inv = 1 / c
                return _Poly({e: v * inv for e, v in a.terms.items()})
            if isinstance(node.op, ast.Pow):
                n = b.const()
                if n is None or not isinstance(n, mpq) or n.denominator != 1 or n < 0:
                    raise ParseError("exponents must be natural number constants")
                out = self.const(1)
                for _ in range(int(n)):
                    out = self.mul(out, a)
                return out
        raise ParseError(f"unsupported syntax: {ast.dump(node)[:60]}")


def infer_dim(text: str) -> int:
    idx = [int(m) for m in re.findall(r"\bx([1-9]\d*)\b", text)]
    return max(idx, default=1)


def parse_polynomial(text: str, dim: int | None = None, cap: int | None = None) -> MultiSeries:
    """Compile an expression into a :class:`MultiSeries`.

    ``dim`` defaults to the largest variable index, ``cap`` to the degree of
    the polynomial (so the result is exact).
    """
    if re.search(r"\d\s*\.|\.\s*\d|[eE][+-]?\d", re.sub(r"x\d+", "", text)):
        raise ParseError(f"decimal numbers are not allowed: {text!r}")
    src = text.replace("^", "**")
    try:
        tree = ast.parse(src.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse polynomial {text!r}: {exc.msg} at offset {exc.offset}") from None
    d = dim if dim is not None else infer_dim(text)
    poly = _Evaluator(d).visit(tree)
    n = poly.deg() if cap is None else cap
    return MultiSeries(d, n, poly.terms)


_SERIES_FUNCS = ("E", "G")


class _SeriesEvaluator:
    """Evaluates the polynomial grammar plus ``E(P)`` and ``G(P)`` at a fixed cap."""

    def __init__(self, dim: int, cap: int):
        self.dim, self.cap = dim, cap
        self.poly = _Evaluator(dim)

    def visit(self, node) -> MultiSeries:
        from germsum.mseries import euler_compose, geometric_in

        if isinstance(node, ast.Expression):
            return self.visit(node.body)
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _SERIES_FUNCS:
                raise ParseError(f"unknown function; allowed: {', '.join(_SERIES_FUNCS)}")
            if len(node.args) != 1 or node.keywords:
                raise ParseError(f"{node.func.id}(...) takes exactly one argument")
            arg = self.visit(node.args[0])
            if arg.constant_term() != 0:
                raise ParseError(f"{node.func.id}(...) needs an argument vanishing at the origin")
            return euler_compose(arg) if node.func.id == "E" else geometric_in(arg)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            f = self.visit(node.operand)
            return -f if isinstance(node.op, ast.USub) else f
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult)):
            a, b = self.visit(node.left), self.visit(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            return a * b
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Div, ast.Pow)):
            if isinstance(node.op, ast.Pow):
                n = self.poly.visit(node.right).const()
                if n is None or not isinstance(n, mpq) or n.denominator != 1 or n < 0:
                    raise ParseError("exponents must be natural number constants")
                return self.visit(node.left) ** int(n)
            c = self.poly.visit(node.right).const()
            if c is None or c == 0:
                raise ParseError("division is only allowed by a nonzero constant")
            return self.visit(node.left).scale(1 / c)
        p = self.poly.visit(node)
        return MultiSeries(self.dim, self.cap, {e: c for e, c in p.terms.items() if sum(e) <= self.cap})


def parse_series(text: str, dim: int | None = None, cap: int = 20) -> MultiSeries:
    """Compile a series expression at ``cap``.

    On top of the polynomial grammar, ``E(P)`` is the Euler series
    ``sum_n (-1)^n n! P^(n+1)`` and ``G(P)`` is ``1/(1 - P)``, for ``P``
    vanishing at the origin.  Example: ``"E(x1)*E(x2)"``.
    """
    if re.search(r"\d\s*\.|\.\s*\d|[eE][+-]?\d", re.sub(r"x\d+", "", text)):
        raise ParseError(f"decimal numbers are not allowed: {text!r}")
    try:
        tree = ast.parse(text.replace("^", "**").strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse series {text!r}: {exc.msg} at offset {exc.offset}") from None
    d = dim if dim is not None else infer_dim(text)
    return _SeriesEvaluator(d, cap).visit(tree)
