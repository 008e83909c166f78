"""Exception hierarchy.

Everything numeric derives from :class:`NumericError` so the CLI can map it
to a single exit code; configuration problems raise :class:`ConfigError`.
"""

from __future__ import annotations


class BrlabError(Exception):
    """Base class for all package errors."""


class ConfigError(BrlabError, ValueError):
    """Invalid user input or experiment configuration."""


class NumericError(BrlabError, ArithmeticError):
    """A numerical contract could not be met."""


class PrecisionExhausted(NumericError):
    """Declared decimal precision cannot certify even one partial quotient."""


class DepthError(NumericError, IndexError):
    """A request goes beyond the depth of a continued-fraction table."""


class ResonanceError(NumericError):
    """An exact (or numerically exact) resonance ``k . omega == 0`` was hit."""

    def __init__(self, k, message: str | None = None):
        self.k = tuple(int(x) for x in k)
        super().__init__(message or f"resonant frequency: k = {self.k}")


class CertificationError(NumericError):
    """A structural hypothesis (orientation, twist, convexity, budget...) failed."""


class DomainExit(NumericError):
    """An orbit left the modelled domain ``|I| < 1``."""

    def __init__(self, message: str, step: int | None = None, time: float | None = None):
        self.step = step
        self.time = time
        super().__init__(message)


class ConvergenceError(NumericError):
    """An iterative solver did not reach its tolerance."""


class IntegrationError(NumericError):
    """Adaptive step-size underflow or a failed integration."""
