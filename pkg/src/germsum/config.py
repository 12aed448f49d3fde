"""Run-time configuration: caps, precision, fit windows and verdict thresholds.

Loaded from a TOML file (flat ``key = value`` pairs, optionally under a
``[germsum]`` table) and overridable by command-line flags.
"""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, fields, replace

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from germsum.errors import ParseError


@dataclass(frozen=True)
class Config:
    default_cap: int = 20
    float_precision_bits: int = 200
    fit_window: tuple = (10, None)  # inclusive shell/component range; None = up to cap
    s_tol: float = 0.1
    residual_tol: float = 0.5
    quadrature_tol: float = 1e-12

    def __post_init__(self):
        if self.default_cap < 1 or self.float_precision_bits < 53:
            raise ParseError("default_cap must be >= 1 and float_precision_bits >= 53")
        if self.s_tol <= 0 or self.residual_tol <= 0 or self.quadrature_tol <= 0:
            raise ParseError("thresholds and tolerances must be positive")
        lo, hi = self.fit_window
        if lo < 0 or (hi is not None and hi < lo):
            raise ParseError(f"bad fit window {self.fit_window}")

    @property
    def dps(self) -> int:
        """Decimal digits matching ``float_precision_bits``."""
        return max(15, int(self.float_precision_bits * 0.30103))

    def with_overrides(self, **kw) -> "Config":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def as_dict(self) -> dict:
        d = asdict(self)
        d["fit_window"] = list(self.fit_window)
        return d


DEFAULT = Config()


def parse_window(text: str) -> tuple:
    """``"a:b"``, ``"a:"`` or ``"a"`` to an inclusive ``(a, b)`` range."""
    try:
        if ":" in text:
            a, b = text.split(":", 1)
            return (int(a) if a.strip() else 0, int(b) if b.strip() else None)
        return (int(text), None)
    except ValueError:
        raise ParseError(f"bad window {text!r}; expected 'a:b'") from None


def load_config(path: str | None) -> Config:
    if path is None:
        return DEFAULT
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    raw = raw.get("germsum", raw)
    known = {f.name for f in fields(Config)}
    unknown = set(raw) - known
    if unknown:
        raise ParseError(f"{path}: unknown config keys {sorted(unknown)}")
    if "fit_window" in raw:
        w = raw["fit_window"]
        raw["fit_window"] = parse_window(w) if isinstance(w, str) else (int(w[0]), int(w[1]) if len(w) > 1 else None)
    try:
        return Config(**raw)
    except TypeError as exc:
        raise ParseError(f"{path}: {exc}") from None
