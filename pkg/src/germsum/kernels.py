"""Backend selection for the hot series kernels.

The compiled Cython module is used when it imports; otherwise the pure-Python
reference implementation is used.  Set ``GERMSUM_PURE_PYTHON=1`` to force the
fallback (the benchmark and the cross-backend tests do this per call instead,
through :func:`backend`).
"""

from __future__ import annotations

import os

from germsum import _kernels_py

try:
    if os.environ.get("GERMSUM_PURE_PYTHON"):
        raise ImportError("pure-Python kernels requested")
    from germsum import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py


def backend(name: str):
    """Return the kernel module called ``name`` ("cython" or "python")."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def mul_terms(a: dict, b: dict, dim: int, cap: int) -> dict:
    return _impl.mul_terms(a, b, dim, cap)


def addmul_shifted(acc: dict, src: dict, coef, shift: tuple, cap: int) -> None:
    _impl.addmul_shifted(acc, src, coef, shift, cap)
