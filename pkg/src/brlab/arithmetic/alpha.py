"""Exact representations of a frequency ratio alpha.

Four input kinds are supported. Each knows how to produce its partial
quotients ``a_1, a_2, ...`` of the fractional part ``[0; a_1, a_2, ...]``
without ever going through binary floating point.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import mpmath

from ..errors import ConfigError, PrecisionExhausted


@dataclass(frozen=True)
class Rational:
    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator == 0:
            raise ConfigError("rational alpha: zero denominator")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def reduced(self) -> Fraction:
        fr = self.fraction
        return fr - math.floor(fr)

    def quotients(self) -> Iterator[int]:
        x = self.reduced()
        if x == 0:
            raise ConfigError(f"rational alpha {self.fraction} reduces to 0 mod 1")
        while x != 0:
            inv = 1 / x
            a = math.floor(inv)
            yield a
            x = inv - a

    def exact_value(self) -> Fraction:
        return self.fraction

    def mpf(self, dps: int = 50):
        x = self.fraction
        with mpmath.workdps(dps):
            return mpmath.mpf(x.numerator) / x.denominator

    def __float__(self) -> float:
        return float(self.fraction)

    def describe(self) -> str:
        return f"rational {self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class Surd:
    """The quadratic irrational ``(a + b*sqrt(d)) / c``."""

    a: int
    b: int
    d: int
    c: int

    def __post_init__(self):
        if self.c == 0:
            raise ConfigError("surd alpha: zero denominator c")
        if self.d <= 0 or self.b == 0:
            raise ConfigError("surd alpha: need d > 0 and b != 0")
        r = math.isqrt(self.d)
        if r * r == self.d:
            raise ConfigError(f"surd alpha: discriminant d = {self.d} is a perfect square")

    def _pdq(self) -> tuple[int, int, int]:
        # Normalise to (P + sqrt(D)) / Q with Q | D - P^2.
        P, D, Q = self.a, self.b * self.b * self.d, self.c
        if self.b < 0:
            P, Q = -P, -Q
        if (D - P * P) % Q:
            P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
        return P, D, Q

    @staticmethod
    def _floor(P: int, D: int, Q: int) -> int:
        s = P + math.isqrt(D)
        if Q > 0:
            return s // Q
        # sqrt(D) is irrational, so the quotient is never an integer
        return -(s // -Q) - 1

    def quotients(self) -> Iterator[int]:
        P, D, Q = self._pdq()
        a0 = self._floor(P, D, Q)
        P = P - a0 * Q  # x - a0 = (P + sqrt D)/Q, in (0, 1)
        # 1/x = Q / (P + sqrt D) = Q (sqrt D - P) / (D - P^2)
        P, Q = -P, (D - P * P) // Q
        while True:
            a = self._floor(P, D, Q)
            yield a
            P = a * Q - P
            Q = (D - P * P) // Q

    def mpf(self, dps: int = 50):
        with mpmath.workdps(dps):
            return (self.a + self.b * mpmath.sqrt(self.d)) / self.c

    def exact_value(self):
        return self

    def __float__(self) -> float:
        return float(self.mpf(30))

    def describe(self) -> str:
        return f"surd ({self.a} + {self.b}*sqrt({self.d}))/{self.c}"


_DECIMAL_RE = re.compile(r"^\s*([+-]?)(\d*)\.?(\d*)\s*$")


@dataclass(frozen=True)
class DecimalString:
    """A decimal expansion whose first ``digits`` fractional digits are trusted.

    The value is only known to lie in ``[x - h, x + h]`` with ``h = 10**-digits / 2``;
    a partial quotient is emitted only when both ends of that interval agree.
    """

    text: str
    digits: int | None = None

    def __post_init__(self):
        m = _DECIMAL_RE.match(self.text)
        if not m or not (m.group(2) or m.group(3)):
            raise ConfigError(f"decimal alpha: cannot parse {self.text!r}")
        if self.digits is not None and self.digits < 0:
            raise ConfigError("decimal alpha: precision must be >= 0")

    @property
    def precision(self) -> int:
        if self.digits is not None:
            return self.digits
        return len(_DECIMAL_RE.match(self.text).group(3))

    def interval(self) -> tuple[Fraction, Fraction]:
        x = Fraction(self.text.strip())
        h = Fraction(1, 2 * 10 ** self.precision)
        return x - h, x + h

    def quotients(self) -> Iterator[int]:
        lo, hi = self.interval()
        a0 = math.floor(lo)
        if math.floor(hi) != a0 or lo == a0:
            raise PrecisionExhausted(f"decimal {self.text!r}: integer part not certified")
        lo, hi = lo - a0, hi - a0
        while True:
            if lo <= 0:
                return
            # x -> 1/x reverses the interval
            lo, hi = 1 / hi, 1 / lo
            a = math.floor(lo)
            if math.floor(hi) != a or lo == a:
                return
            yield a
            lo, hi = lo - a, hi - a

    def mpf(self, dps: int = 50):
        x = self.exact_value()
        with mpmath.workdps(dps):
            return mpmath.mpf(x.numerator) / x.denominator

    def exact_value(self) -> Fraction:
        return Fraction(self.text.strip())

    def __float__(self) -> float:
        return float(self.exact_value())

    def describe(self) -> str:
        return f"decimal {self.text.strip()} ({self.precision} digits)"


@dataclass(frozen=True)
class Quotients:
    """An explicit prefix ``a_1, ..., a_N`` of partial quotients."""

    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(a) for a in self.values))
        if not self.values:
            raise ConfigError("partial-quotient list is empty")
        if any(a < 1 for a in self.values):
            raise ConfigError("partial quotients must be >= 1")

    def quotients(self) -> Iterator[int]:
        yield from self.values

    def exact_value(self) -> Fraction:
        x = Fraction(0)
        for a in reversed(self.values):
            x = 1 / (a + x)
        return x

    def mpf(self, dps: int = 50):
        x = self.exact_value()
        with mpmath.workdps(dps):
            return mpmath.mpf(x.numerator) / x.denominator

    def __float__(self) -> float:
        return float(self.exact_value())

    def describe(self) -> str:
        head = ",".join(map(str, self.values[:8]))
        return f"quotients [0; {head}{',...' if len(self.values) > 8 else ''}]"


AlphaInput = Union[Rational, Surd, DecimalString, Quotients]


def golden() -> Surd:
    """gamma = (sqrt 5 - 1)/2, all partial quotients equal to 1."""
    return Surd(-1, 1, 5, 2)


def parse_alpha(text: str, precision: int | None = None) -> AlphaInput:
    """Parse the short textual forms used in config files.

    ``golden``, ``p/q``, ``surd:a,b,d,c``, ``cf:1,2,2,...`` or a decimal string.
    """
    t = text.strip()
    if t == "golden":
        return golden()
    if t.startswith("surd:"):
        parts = [int(s) for s in t[5:].split(",")]
        if len(parts) != 4:
            raise ConfigError(f"surd needs a,b,d,c: {text!r}")
        return Surd(*parts)
    if t.startswith("cf:"):
        return Quotients(tuple(int(s) for s in t[3:].split(",") if s.strip()))
    if "/" in t:
        num, den = t.split("/", 1)
        try:
            return Rational(int(num), int(den))
        except ValueError as exc:
            raise ConfigError(f"bad rational {text!r}") from exc
    return DecimalString(t, precision)
