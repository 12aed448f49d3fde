"""Exception hierarchy shared by every module."""

from __future__ import annotations


class GermsumError(Exception):
    """Base class for all package errors."""


class DimensionError(GermsumError, ValueError):
    """Operands live in different ambient dimensions."""


class DivisibilityError(GermsumError, ArithmeticError):
    """An exact division left a nonzero remainder."""


class NonUnitError(GermsumError, ArithmeticError):
    """A unit was required but the constant term vanishes."""


class CertificationError(GermsumError):
    """The truncation order is too low to decide the question asked."""


class DegenerateOperatorError(GermsumError):
    """The leading coefficient of a constructed operator vanishes identically."""


class FitError(GermsumError, ValueError):
    """Too few data points for a growth fit."""


class SectorError(GermsumError, ValueError):
    """A sample point lies outside the admissible Laplace sector."""


class QuadratureError(GermsumError, ArithmeticError):
    """The integrand could not be evaluated to a finite value."""


class ParseError(GermsumError, ValueError):
    """Malformed textual input (series JSON, words, couples, polynomials)."""
