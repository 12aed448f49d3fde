"""Growth fits on coefficient data: Gevrey orders, radius verdicts and the
diagonal split test.

Everything here works on ``log|coefficient|`` in double precision; the
exact rationals are converted through :func:`germsum.coeffs.log_abs`, so
huge factorials never overflow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from germsum.coeffs import log_abs
from germsum.config import DEFAULT, Config
from germsum.errors import FitError, GermsumError
from germsum.mseries import MultiSeries

S_LOW, S_HIGH = -10.0, 50.0
MIN_SHELLS_MONOMIAL = 4
MIN_SHELLS_RADIUS = 10


@dataclass
class GevreyFit:
    """Fitted witness ``|f| <~ C A^n n!^s`` with its goodness of fit."""

    s: float
    logA: float
    logC: float
    residual: float
    window: tuple
    points: int = 0

    def as_dict(self) -> dict:
        return {
            "s": _num(self.s),
            "logA": _num(self.logA),
            "logC": _num(self.logC),
            "residual": _num(self.residual),
            "window": list(self.window),
            "points": self.points,
        }


def _num(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


class Kind(enum.Enum):
    CONVERGENT = "CONVERGENT"
    DIVERGENT_GEVREY = "DIVERGENT_GEVREY"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class GrowthVerdict:
    kind: Kind
    radius_estimate: float | None = None
    s: float | None = None
    diagnostics: str = ""

    def __post_init__(self):
        if self.kind is Kind.CONVERGENT and not (self.radius_estimate and self.radius_estimate > 0):
            raise GermsumError("a convergent verdict needs a positive radius estimate")

    def label(self) -> str:
        if self.kind is Kind.DIVERGENT_GEVREY:
            return f"DIVERGENT_GEVREY(s={self.s:.3f})"
        return self.kind.value

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "s": None if self.s is None else _num(self.s),
            "radius_estimate": None if self.radius_estimate is None else _num(self.radius_estimate),
            "diagnostics": self.diagnostics,
        }


def _lstsq(cols: list, y: np.ndarray) -> tuple[np.ndarray, float]:
    X = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = float(np.sqrt(np.mean((X @ coef - y) ** 2)))
    return coef, resid


def _window(window, cap: int, cfg: Config) -> tuple[int, int]:
    lo, hi = window if window is not None else cfg.fit_window
    return int(lo), int(cap if hi is None else min(hi, cap))


def _lfact(ns) -> np.ndarray:
    return np.array([math.lgamma(n + 1) for n in ns], dtype=float)


# monomial Gevrey order ------------------------------------------------------
def _monomial_shells(f: MultiSeries, alpha: Sequence[int], lo: int, hi: int) -> dict:
    shells: dict = {}
    for e, c in f.terms.items():
        n = sum(e)
        if lo <= n <= hi:
            m = min(math.lgamma(b + 1) / a for b, a in zip(e, alpha))
            shells.setdefault(n, []).append((log_abs(c), m))
    return {n: (np.array([p[0] for p in v]), np.array([p[1] for p in v])) for n, v in shells.items()}


def _envelope(shells: dict, ns: list, s: float) -> np.ndarray:
    return np.array([np.max(shells[n][0] - s * shells[n][1]) for n in ns])


def fit_monomial_gevrey(f: MultiSeries, alpha: Sequence[int], window=None, cfg: Config = DEFAULT) -> GevreyFit:
    """Gevrey order of ``f`` with respect to the monomial ``x^alpha``.

    For a trial order ``s`` the shell envelope
    ``g_n(s) = max_{|b|=n} (log|f_b| - s m(b))`` with
    ``m(b) = min_j log(b_j!) / alpha_j`` is fitted against
    ``[1, n, log n!]``; the returned ``s`` is the root of the ``log n!``
    coefficient (found by bisection on ``[-10, 50]``), i.e. the least order
    for which the normalized coefficients grow at most geometrically.
    ``logC`` and ``logA`` come from a linear fit of ``g_n(s)``.  When even
    ``s = 50`` leaves factorial growth, ``s = inf`` is reported (the series
    is not Gevrey in this monomial).
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != f.dim or any(a <= 0 for a in alpha):
        raise GermsumError("alpha must have positive entries and match the dimension")
    lo, hi = _window(window, f.cap, cfg)
    shells = _monomial_shells(f, alpha, lo, hi)
    ns = sorted(shells)
    if len(ns) < MIN_SHELLS_MONOMIAL:
        raise FitError(f"need at least {MIN_SHELLS_MONOMIAL} nonempty shells in [{lo}, {hi}], have {len(ns)}")
    one = np.ones(len(ns))
    nn = np.array(ns, dtype=float)
    lf = _lfact(ns)

    def fact_coef(s: float) -> float:
        coef, _ = _lstsq([one, nn, lf], _envelope(shells, ns, s))
        return float(coef[2])

    a, b = S_LOW, S_HIGH
    if fact_coef(b) > 0:
        s = math.inf
    elif fact_coef(a) <= 0:
        s = a
    else:
        for _ in range(80):
            mid = 0.5 * (a + b)
            if fact_coef(mid) > 0:
                a = mid
            else:
                b = mid
        s = 0.5 * (a + b)
    if math.isfinite(s):
        coef, resid = _lstsq([one, nn], _envelope(shells, ns, s))
        logC, logA = float(coef[0]), float(coef[1])
    else:
        logC = logA = math.nan
        resid = math.inf
    return GevreyFit(s, logA, logC, resid, (lo, hi), len(ns))


# component-wise Gevrey order ------------------------------------------------
def majorant(f: MultiSeries, r: float) -> float:
    """``sum |coef| r^|g|``: an upper bound for ``sup |f|`` on the polydisk of radius ``r``."""
    return sum(math.exp(log_abs(c) + sum(e) * math.log(r)) for e, c in f.terms.items())


def log_majorant(f: MultiSeries, r: float) -> float:
    vals = [log_abs(c) + sum(e) * math.log(r) for e, c in f.terms.items()]
    if not vals:
        return -math.inf
    top = max(vals)
    return top + math.log(sum(math.exp(v - top) for v in vals))


def fit_component_gevrey(dec, r: float, window=None, cfg: Config = DEFAULT) -> GevreyFit:
    """Fit ``log M_n`` against ``[1, n, log n!]`` with ``M_n`` the majorant of component ``n``."""
    if r <= 0:
        raise GermsumError("radius must be positive")
    comps = dec.components
    lo, hi = window if window is not None else cfg.fit_window
    hi = len(comps) - 1 if hi is None else min(hi, len(comps) - 1)
    if len(comps) - 1 < lo:
        lo = 0
    ns, ys = [], []
    for n in range(lo, hi + 1):
        v = log_majorant(comps[n], r)
        if math.isfinite(v):
            ns.append(n)
            ys.append(v)
    if len(ns) < 3:
        raise FitError(f"need at least 3 nonzero components in [{lo}, {hi}], have {len(ns)}")
    coef, resid = _lstsq([np.ones(len(ns)), np.array(ns, float), _lfact(ns)], np.array(ys))
    return GevreyFit(float(coef[2]), float(coef[1]), float(coef[0]), resid, (lo, hi), len(ns))


# radius verdict -------------------------------------------------------------
def shell_maxima(f: MultiSeries) -> dict:
    """``n -> max_{|b| = n} log|f_b|`` over nonempty shells ``n >= 1``."""
    out: dict = {}
    for e, c in f.terms.items():
        n = sum(e)
        if n >= 1:
            v = log_abs(c)
            if v > out.get(n, -math.inf):
                out[n] = v
    return out


def radius_estimate(f: MultiSeries, cfg: Config = DEFAULT) -> GrowthVerdict:
    """Classify the growth of the shell maxima ``M_n = max_{|b|=n} |f_b|``.

    ``log M_n`` is fitted against ``[1, n, log n!]``.  A factorial
    coefficient below ``s_tol`` together with a small residual of the pure
    geometric fit ``[1, n]`` gives CONVERGENT with
    ``rho = 1 / max M_n^(1/n)`` over the upper half of the shells; a
    coefficient ``>= s_tol`` with a small residual gives DIVERGENT_GEVREY.
    """
    if f.is_zero():
        return GrowthVerdict(Kind.CONVERGENT, math.inf, 0.0, "zero series")
    sh = shell_maxima(f)
    ns = sorted(sh)
    if len(ns) < MIN_SHELLS_RADIUS:
        return GrowthVerdict(Kind.INCONCLUSIVE, None, None, f"only {len(ns)} nonempty shells (need {MIN_SHELLS_RADIUS})")
    y = np.array([sh[n] for n in ns])
    one, nn = np.ones(len(ns)), np.array(ns, float)
    coef, resid_fact = _lstsq([one, nn, _lfact(ns)], y)
    _, resid_geo = _lstsq([one, nn], y)
    s = float(coef[2])
    top = ns[len(ns) // 2 :]
    root_max = max(sh[n] / n for n in top)
    rho = math.exp(-root_max)
    diag = f"s={s:.4f} residual_factorial={resid_fact:.4f} residual_geometric={resid_geo:.4f} shells={len(ns)}"
    if abs(s) < cfg.s_tol and resid_geo < cfg.residual_tol and rho > 0:
        return GrowthVerdict(Kind.CONVERGENT, rho, s, diag)
    if s >= cfg.s_tol and resid_fact < cfg.residual_tol:
        return GrowthVerdict(Kind.DIVERGENT_GEVREY, None, s, diag)
    return GrowthVerdict(Kind.INCONCLUSIVE, None, s, diag)


# diagonal split test --------------------------------------------------------
@dataclass
class SplitReport:
    verdict: str  # "INFEASIBLE" or "FEASIBLE"
    factorial_coef: float | None
    root_slope: float | None
    window: tuple
    points: int
    diagnostics: str = ""

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "factorial_coef": self.factorial_coef,
            "root_slope": self.root_slope,
            "window": list(self.window),
            "points": self.points,
            "diagnostics": self.diagnostics,
        }


def split_infeasibility(F: MultiSeries, window=None) -> SplitReport:
    """Test whether ``F`` can be a sum ``g1 + g2`` with ``g_j`` 1-Gevrey in ``x_j``.

    Such a sum has diagonal coefficients ``|F_kk| <= C A^k k!``, so
    ``r_k = |F_kk| / k!`` has bounded ``k``-th roots.  With
    ``y_k = log r_k`` the verdict is INFEASIBLE when a fit of ``y_k``
    against ``[1, k, log k!]`` keeps a factorial coefficient ``>= 1/2`` and
    ``log r_k^(1/k)`` still grows against ``log k`` with slope ``>= 1/2``.
    """
    if F.dim != 2:
        raise GermsumError("split test needs a two-variable series")
    lo, hi = window if window is not None else (1, F.cap // 2)
    hi = min(hi, F.cap // 2)
    lo = max(lo, 1)
    if hi - lo + 1 < 5:
        raise FitError(f"diagonal window [{lo}, {hi}] has fewer than 5 indices")
    ks, ys = [], []
    for k in range(lo, hi + 1):
        c = F.coefficient((k, k))
        if c != 0:
            ks.append(k)
            ys.append(log_abs(c) - math.lgamma(k + 1))
    if len(ks) < 3:
        return SplitReport("FEASIBLE", None, None, (lo, hi), len(ks), "diagonal essentially empty")
    y = np.array(ys)
    kk = np.array(ks, float)
    coef, resid = _lstsq([np.ones(len(ks)), kk, _lfact(ks)], y)
    roots = y / kk
    slope_coef, _ = _lstsq([np.ones(len(ks)), np.log(kk)], roots)
    fc, rs = float(coef[2]), float(slope_coef[1])
    verdict = "INFEASIBLE" if fc >= 0.5 and rs >= 0.5 else "FEASIBLE"
    diag = f"factorial_coef={fc:.4f} root_slope={rs:.4f} fit_residual={resid:.4f}"
    return SplitReport(verdict, fc, rs, (lo, hi), len(ks), diag)


# tauberian verdict ----------------------------------------------------------
@dataclass
class TauberianReport:
    lines: list
    passed: bool | None  # None when only one couple was given (report only)
    per_couple: list = field(default_factory=list)
    radius: GrowthVerdict | None = None

    @property
    def exit_code(self) -> int:
        return 1 if self.passed is False else 0

    def as_dict(self) -> dict:
        return {
            "lines": self.lines,
            "result": None if self.passed is None else ("PASS" if self.passed else "FAIL"),
            "per_couple": self.per_couple,
            "radius": None if self.radius is None else self.radius.as_dict(),
        }


def _fmt_alpha(alpha) -> str:
    return "(" + ",".join(str(a) for a in alpha) + ")"


def tauberian_verdict(f: MultiSeries, couples: Sequence, cfg: Config = DEFAULT, window=None) -> TauberianReport:
    """Run the decision pipeline for ``f`` against couples ``(alpha, 1/k)``.

    With one couple the fitted Gevrey order in ``x^alpha`` is reported.  With
    two or more pairwise inequivalent couples, summability in all of them
    forces convergence; the report states that implication and the outcome of
    :func:`radius_estimate` decides PASS (convergent) or FAIL.
    """
    from germsum.geometry import couple_equiv

    couples = list(couples)
    if not couples:
        raise GermsumError("need at least one couple")
    lines: list = []
    per: list = []
    for c in couples:
        fit = fit_monomial_gevrey(f, c.alpha, window, cfg)
        level = float(Fraction(1) / c.k)
        compatible = fit.s <= level + cfg.s_tol
        per.append({"couple": str(c), "s": _num(fit.s), "residual": _num(fit.residual), "level": level, "growth_compatible": compatible})
        if fit.s >= cfg.s_tol:
            lines.append(f"divergent, Gevrey ≈ {fit.s:.3f} w.r.t. {_fmt_alpha(c.alpha)}")
        else:
            lines.append(f"no factorial growth w.r.t. {_fmt_alpha(c.alpha)} (s ≈ {fit.s:.3f})")
    if len(couples) == 1:
        return TauberianReport(lines, None, per)
    for i in range(len(couples)):
        for j in range(i + 1, len(couples)):
            if couple_equiv(couples[i], couples[j]):
                raise GermsumError(f"couples {couples[i]} and {couples[j]} are equivalent; the implication needs inequivalent couples")
    lines.append("summable w.r.t. pairwise inequivalent couples => forced convergent; check radius")
    rv = radius_estimate(f, cfg)
    passed = rv.kind is Kind.CONVERGENT
    lines.append(f"radius check: {rv.label()} -> {'PASS' if passed else 'FAIL'}")
    return TauberianReport(lines, passed, per, rv)
