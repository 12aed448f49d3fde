"""One-variable Borel-Laplace numerics.

``formal_borel`` divides coefficients by ``Gamma(1 + n/k)``.  A Borel
transform is continued through a :class:`ContinuationHandle` (a registered
closed form or a Pade approximant) and resummed by ``laplace_sum``, which
integrates along the ray ``arg xi = theta`` with a hand-rolled adaptive
Gauss-Legendre scheme.  ``optimal_truncation`` is the independent
smallest-term companion, ``remainder_check`` fits the asymptotic remainder
bound, and ``vandermonde_bound`` computes the coefficient-recovery constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np
from gmpy2 import mpq
from mpmath.calculus.quadrature import GaussLegendre

from germsum.coeffs import coerce, to_mp
from germsum.config import DEFAULT, Config
from germsum.errors import FitError, GermsumError, QuadratureError, SectorError
from germsum.mseries import Germ, MultiSeries


# one-variable series ---------------------------------------------------------
@dataclass(frozen=True)
class OneVarSeries:
    """``sum a_n t^n`` for ``n <= N``; exact coefficients or mpmath numbers."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @classmethod
    def exact(cls, values: Sequence) -> "OneVarSeries":
        return cls(tuple(coerce(v) for v in values))

    @classmethod
    def from_multiseries(cls, f: MultiSeries) -> "OneVarSeries":
        if f.dim != 1:
            raise GermsumError("expected a one-variable series")
        return cls(tuple(f.coefficient((n,)) for n in range(f.cap + 1)))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, t):
        total = mpmath.mpf(0)
        for c in reversed(self.coeffs):
            total = total * t + _mp(c)
        return total


def _mp(c):
    if isinstance(c, (mpmath.mpf, mpmath.mpc)):
        return c
    if isinstance(c, (int, float, complex)):
        return mpmath.mpmathify(c)
    return to_mp(c)


def euler_one_var(N: int) -> OneVarSeries:
    """``sum_{n>=0} (-1)^n n! t^(n+1)`` truncated at degree ``N``."""
    coeffs = [mpq(0)] + [mpq((-1) ** n * math.factorial(n)) for n in range(N)]
    return OneVarSeries(tuple(coeffs))


def geometric_one_var(N: int) -> OneVarSeries:
    return OneVarSeries(tuple(mpq(1) for _ in range(N + 1)))


def formal_borel(f: OneVarSeries, k=1) -> OneVarSeries:
    """Coefficient ``a_n / Gamma(1 + n/k)``; exact when ``n/k`` is an integer."""
    k = Fraction(k)
    if k <= 0:
        raise GermsumError("k must be positive")
    out = []
    for n, a in enumerate(f.coeffs):
        m = Fraction(n) / k
        if m.denominator == 1 and not isinstance(a, (mpmath.mpf, mpmath.mpc)):
            out.append(coerce(a) / math.factorial(int(m)))
        else:
            out.append(_mp(a) / mpmath.gamma(1 + mpmath.mpf(m.numerator) / m.denominator))
    return OneVarSeries(tuple(out))


# continuation handles ----------------------------------------------------------
def _geometric(xi):
    return 1 / (1 - xi)


CLOSED_FORMS: dict = {
    "log1p": lambda xi: mpmath.log1p(xi),
    "geometric": _geometric,
    "exp": lambda xi: mpmath.exp(xi),
}


@dataclass
class ContinuationHandle:
    """Evaluable continuation of a Borel transform."""

    kind: str  # "CLOSED_FORM", "PADE" or "COMBINATION"
    label: str
    fn: Callable = field(repr=False)
    denominator: list | None = field(default=None, repr=False)

    def __call__(self, xi):
        return self.fn(xi)

    @classmethod
    def closed_form(cls, name: str) -> "ContinuationHandle":
        if name not in CLOSED_FORMS:
            raise GermsumError(f"unknown closed form {name!r}; registered: {sorted(CLOSED_FORMS)}")
        return cls("CLOSED_FORM", name, CLOSED_FORMS[name])

    @classmethod
    def pade(cls, borel: OneVarSeries, L: int, M: int | None = None) -> "ContinuationHandle":
        """Pade approximant ``[L/M]`` (diagonal by default) of the Borel coefficients."""
        M = L if M is None else M
        if len(borel.coeffs) < L + M + 1:
            raise GermsumError(f"[{L}/{M}] approximant needs {L + M + 1} coefficients")
        coeffs = [_mp(c) for c in borel.coeffs[: L + M + 1]]
        p, q = mpmath.pade(coeffs, L, M)

        def fn(xi, p=p, q=q):
            return mpmath.polyval(p[::-1], xi) / mpmath.polyval(q[::-1], xi)

        return cls("PADE", f"pade[{L}/{M}]", fn, list(q))

    @classmethod
    def combination(cls, terms: Sequence[tuple]) -> "ContinuationHandle":
        """``sum c_i h_i`` for pairs ``(c_i, h_i)``."""
        terms = [(_mp(coerce(c)) if not isinstance(c, (float, complex)) else mpmath.mpmathify(c), h) for c, h in terms]

        def fn(xi):
            return sum((c * h(xi) for c, h in terms), mpmath.mpf(0))

        label = " + ".join(f"{mpmath.nstr(c, 6)}*{h.label}" for c, h in terms)
        return cls("COMBINATION", label, fn)

    def pole_arguments(self) -> list:
        """Arguments of the approximant's poles (a diagnostic, never a verdict)."""
        if self.denominator is None:
            return []
        q = [c for c in self.denominator]
        while len(q) > 1 and q[-1] == 0:
            q.pop()
        if len(q) < 2:
            return []
        roots = mpmath.polyroots(q[::-1], maxsteps=200, extraprec=60)
        return sorted(float(mpmath.arg(r)) for r in roots)


# Laplace quadrature ----------------------------------------------------------
@dataclass
class Sample:
    x: complex
    value: complex
    est_error: float

    def as_dict(self) -> dict:
        return {
            "x": [float(mpmath.re(self.x)), float(mpmath.im(self.x))],
            "value": [float(mpmath.re(self.value)), float(mpmath.im(self.value))],
            "est_error": float(self.est_error),
        }


@dataclass
class SummationReport:
    k: Fraction
    theta: float
    samples: list

    def as_dict(self) -> dict:
        return {"k": str(self.k), "theta": float(self.theta), "samples": [s.as_dict() for s in self.samples]}


_NODE_CACHE: dict = {}


def _gl_nodes(degree: int, prec: int) -> list:
    key = (degree, prec)
    if key not in _NODE_CACHE:
        _NODE_CACHE[key] = GaussLegendre(mpmath.mp).calc_nodes(degree, prec)
    return _NODE_CACHE[key]


def _gl(h, a, b, degree: int):
    half = (b - a) / 2
    mid = (a + b) / 2
    return half * sum((w * h(mid + half * x) for x, w in _gl_nodes(degree, mpmath.mp.prec)), mpmath.mpf(0))


MAX_DEPTH = 40
SPLIT = math.sqrt(2) - 1
MAX_PANELS = 20000


def _adaptive(h, a, b, tol, budget: list, depth: int = 0):
    budget[0] -= 1
    if budget[0] < 0:
        raise QuadratureError(f"adaptive quadrature exhausted its panel budget near [{float(a)}, {float(b)}]")
    coarse = _gl(h, a, b, 3)
    fine = _gl(h, a, b, 4)
    err = abs(fine - coarse)
    if err <= tol:
        return fine, err
    if depth >= MAX_DEPTH:
        # only a singular integrand keeps failing on panels this narrow
        raise QuadratureError(f"quadrature does not settle near xi-parameter {float(a)}; is the ray through a singularity?")
    # off-centre split: a pole at the centre of a symmetric rule would
    # cancel in both estimates and pass as a principal value
    m = a + (b - a) * SPLIT
    left, el = _adaptive(h, a, m, tol * SPLIT, budget, depth + 1)
    right, er = _adaptive(h, m, b, tol * (1 - SPLIT), budget, depth + 1)
    return left + right, el + er


def _sector_phase(x, theta, k: Fraction):
    phi = theta - float(mpmath.arg(x))
    phi = (phi + math.pi) % (2 * math.pi) - math.pi
    if abs(phi) >= math.pi / (2 * float(k)):
        raise SectorError(
            f"x = {complex(x)} lies outside the sector |arg x - theta| < pi/(2k) around theta = {theta}"
        )
    return phi


def laplace_point(g: Callable, k, theta: float, x, tol: float | None = None, max_panels: int = 200):
    """Laplace integral at one point; returns ``(value, est_error)``.

    With ``phi = theta - arg x`` and ``tau = (xi/x)^k`` the integral becomes
    ``e^{i k phi} int_0^inf exp(-tau e^{i k phi}) g(|x| tau^{1/k} e^{i theta}) dtau``,
    computed on panels ``[0, 1/2], [1/2, 1], [1, 2], ...`` until a tail bound
    from the last panel drops below ``tol`` relative to the running value.
    ``tol`` defaults to three digits above the working precision.
    """
    k = Fraction(k)
    x = mpmath.mpmathify(x)
    if tol is None:
        tol = 10.0 ** (-(mpmath.mp.dps - 3))
    if x == 0:
        return g(mpmath.mpf(0)), 0.0
    phi = _sector_phase(x, theta, k)
    kf = mpmath.mpf(k.numerator) / k.denominator
    rot = mpmath.expj(kf * phi)
    decay = float(mpmath.cos(kf * phi))
    ray = abs(x) * mpmath.expj(theta)
    inv_k = 1 / kf

    def h(tau):
        val = g(ray * tau**inv_k) if tau != 0 else g(mpmath.mpf(0))
        if not mpmath.isfinite(mpmath.re(val)) or not mpmath.isfinite(mpmath.im(val)):
            raise QuadratureError(f"continuation is not finite at xi = {complex(ray * tau ** inv_k)}")
        return mpmath.exp(-tau * rot) * val

    total = mpmath.mpf(0)
    err = 0.0
    budget = [MAX_PANELS]
    a, b = mpmath.mpf(0), mpmath.mpf("0.5")
    for _ in range(max_panels):
        part, e = _adaptive(h, a, b, tol * max(1.0, float(abs(total))) / 4, budget)
        total += part
        err += float(e)
        edge = abs(h(b))
        tail = float(edge) / decay * 2
        if tail <= tol * max(float(abs(total)), 1e-300) and b >= 1:
            err += tail
            return rot * total, err
        a, b = b, 2 * b if b >= 1 else b + mpmath.mpf("0.5")
    raise QuadratureError("Laplace integral did not converge within the panel budget")


def laplace_sum(
    g: ContinuationHandle | Callable,
    k,
    theta: float,
    xs: Sequence,
    dps: int | None = None,
    tol: float | None = None,
    cfg: Config = DEFAULT,
) -> SummationReport:
    """Borel-Laplace sum of the continuation ``g`` in direction ``theta`` at each ``x``."""
    dps = dps or cfg.dps
    samples = []
    with mpmath.workdps(dps):
        t = tol if tol is not None else max(cfg.quadrature_tol * 1e-6, 10.0 ** (-(dps - 8)))
        for x in xs:
            v, e = laplace_point(g, k, theta, x, t)
            samples.append(Sample(mpmath.mpmathify(x), v, e))
    return SummationReport(Fraction(k), theta, samples)


# optimal truncation ------------------------------------------------------------
def optimal_truncation(f: OneVarSeries, t) -> tuple:
    """Sum up to the smallest term; the first omitted term is the error estimate.

    Zero coefficients are skipped when locating the smallest term.  If the
    terms keep decreasing through the stored coefficients the full sum is
    returned with a ratio-based tail bound.

    Raises
    ------
    GermsumError
        If the magnitudes increase right away (``|t|`` too large).
    """
    t = mpmath.mpmathify(t)
    coeffs = [_mp(c) for c in f.coeffs]
    if t == 0:
        return coeffs[0] if coeffs else mpmath.mpf(0), 0.0
    idx = [n for n, c in enumerate(coeffs) if c != 0]
    if not idx:
        return mpmath.mpf(0), 0.0
    mags = [abs(coeffs[n] * t**n) for n in idx]
    if len(mags) >= 2 and mags[1] > mags[0]:
        raise GermsumError("terms increase immediately; |t| is too large for optimal truncation")
    stop = None
    for p in range(len(mags) - 1):
        if mags[p + 1] > mags[p]:
            stop = p
            break
    if stop is None:
        value = sum((coeffs[n] * t**n for n in idx), mpmath.mpf(0))
        last = mags[-1]
        ratio = mags[-1] / mags[-2] if len(mags) >= 2 and mags[-2] != 0 else mpmath.mpf(1)
        bound = last * ratio / (1 - ratio) if ratio < 1 else last
        return value, float(bound)
    value = sum((coeffs[n] * t**n for n in idx[:stop]), mpmath.mpf(0))
    return value, float(mags[stop])


# remainder fit -------------------------------------------------------------------
@dataclass
class RemainderReport:
    status: str  # "CERTIFIED" or "NOT_CERTIFIED"
    logC: float
    logB: float
    residual: float
    excess: float
    window: tuple
    log_sup: list

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "logC": self.logC,
            "logB": self.logB,
            "residual": self.residual,
            "excess": self.excess,
            "window": list(self.window),
            "log_sup": self.log_sup,
        }


def remainder_check(
    f_values: Sequence,
    dec,
    P: Germ | MultiSeries,
    s,
    sample_points: Sequence,
    window: tuple = (3, 12),
    cfg: Config = DEFAULT,
    dps: int | None = None,
) -> RemainderReport:
    """Fit the remainders ``R_N = |f - sum_{n<N} f_n P^n| / (N!^s |P|^N)``.

    ``log sup_x R_N`` is fitted against ``[1, N]`` (giving ``logC``,
    ``logB`` and the residual) and against ``[1, N, log N!]`` (giving the
    excess factorial coefficient).  CERTIFIED needs a residual below
    ``residual_tol`` and an excess below ``1/2``: a wrong ``s`` leaves
    factorial growth that the linear model can only partly absorb.
    """
    if len(sample_points) < 2 or len(f_values) != len(sample_points):
        raise FitError("need at least two sample points with matching values")
    lo, hi = window
    if hi - lo + 1 < 3:
        raise FitError("remainder window needs at least 3 orders")
    if hi > dec.n_max:
        raise FitError(f"decomposition has {dec.n_max} components; window reaches {hi}")
    series = P.series if isinstance(P, Germ) else P
    s = Fraction(s)
    with mpmath.workdps(dps or cfg.dps):
        sf = mpmath.mpf(s.numerator) / s.denominator
        rows = []
        for x, fx in zip(sample_points, f_values):
            px = series.evaluate_mp(x)
            comps = [c.evaluate_mp(x) for c in dec.components[:hi]]
            partial = mpmath.mpf(0)
            rs = {}
            for N in range(0, hi + 1):
                if N >= lo:
                    rem = abs(mpmath.mpmathify(fx) - partial)
                    rs[N] = mpmath.log(rem) - sf * mpmath.loggamma(N + 1) - N * mpmath.log(abs(px)) if rem else -mpmath.inf
                if N < hi:
                    partial += comps[N] * px**N
            rows.append(rs)
        Ns = list(range(lo, hi + 1))
        log_sup = [float(max(r[N] for r in rows)) for N in Ns]
    y = np.array(log_sup)
    if not np.all(np.isfinite(y)):
        raise FitError("remainder vanished at some order; cannot fit")
    nn = np.array(Ns, float)
    X1 = np.column_stack([np.ones(len(Ns)), nn])
    c1, *_ = np.linalg.lstsq(X1, y, rcond=None)
    resid = float(np.sqrt(np.mean((X1 @ c1 - y) ** 2)))
    X2 = np.column_stack([np.ones(len(Ns)), nn, [math.lgamma(N + 1) for N in Ns]])
    c2, *_ = np.linalg.lstsq(X2, y, rcond=None)
    excess = float(c2[2])
    ok = resid < cfg.residual_tol and excess < 0.5
    return RemainderReport("CERTIFIED" if ok else "NOT_CERTIFIED", float(c1[0]), float(c1[1]), resid, excess, (lo, hi), log_sup)


def germ_sum_values(g, k, P: Germ | MultiSeries, points: Sequence, cfg: Config = DEFAULT, dps: int | None = None) -> list:
    """Values ``f(x) = (Laplace sum of g)(P(x))`` taking ``theta = arg P(x)`` per point.

    The quadrature runs at the full working precision: remainder fits
    compare these values with partial sums down to ``|P|^N``.
    """
    series = P.series if isinstance(P, Germ) else P
    dps = dps or cfg.dps
    out = []
    with mpmath.workdps(dps):
        for x in points:
            t = series.evaluate_mp(x)
            theta = float(mpmath.arg(t)) if t != 0 else 0.0
            rep = laplace_sum(g, k, theta, [t], dps=dps, tol=10.0 ** (-(dps - 8)), cfg=cfg)
            out.append(rep.samples[0].value)
    return out


def euler_sum(t, dps: int = 30):
    """Borel-Laplace sum of the Euler series at ``t`` in direction ``arg t``."""
    t = mpmath.mpmathify(t)
    theta = float(mpmath.arg(t)) if t != 0 else 0.0
    with mpmath.workdps(dps):
        v, _ = laplace_point(CLOSED_FORMS["log1p"], 1, theta, t, 10.0 ** (-(dps - 6)))
    return v


def euler_ode_residual(ts: Sequence, dps: int = 40, h: float = 1e-6) -> float:
    """``max |t^2 y' + y - t|`` over ``ts`` with ``y'`` by central differences."""
    worst = 0.0
    with mpmath.workdps(dps):
        hh = mpmath.mpf(h)
        for t in ts:
            t = mpmath.mpf(t)
            y = euler_sum(t, dps)
            dy = (euler_sum(t + hh, dps) - euler_sum(t - hh, dps)) / (2 * hh)
            worst = max(worst, float(abs(t * t * dy + y - t)))
    return worst


# Vandermonde constant ----------------------------------------------------------
def vandermonde_bound(a: float, b: float, rho: float, M: int) -> float:
    """``M * ||G^{-1}||_1`` for ``G = (t_i^j)`` at ``M`` points equally spaced inside the arc."""
    if not a < b:
        raise GermsumError("need a < b")
    if M < 1 or rho <= 0:
        raise GermsumError("need M >= 1 and rho > 0")
    angles = [a + (i + 1) * (b - a) / (M + 1) for i in range(M)]
    pts = np.array([rho * complex(math.cos(t), math.sin(t)) for t in angles])
    G = np.vander(pts, M, increasing=True)
    if np.linalg.cond(G) > 1e14:
        raise GermsumError("Vandermonde matrix is numerically singular")
    Ginv = np.linalg.inv(G)
    return float(M * np.abs(Ginv).sum(axis=0).max())


def arc_points(a: float, b: float, rho: float, M: int) -> np.ndarray:
    angles = [a + (i + 1) * (b - a) / (M + 1) for i in range(M)]
    return np.array([rho * complex(math.cos(t), math.sin(t)) for t in angles])
