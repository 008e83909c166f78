"""Continued-fraction tables and the Bruno / Russmann series built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from ..errors import ConfigError, DepthError, PrecisionExhausted
from .alpha import AlphaInput, DecimalString, Quotients, Rational

EXACT = "exact"
PRECISION_LIMITED = "precision-limited"

DEFAULT_DIGIT_BUDGET = 10_000


@dataclass(frozen=True)
class ConvergentTable:
    """Partial quotients ``a_1..a_N`` and convergents ``p_n/q_n``, ``n = 0..N``.

    ``q_{-1} = 0, q_0 = 1`` and ``p_{-1} = 1, p_0 = 0``: the table describes the
    fractional part ``[0; a_1, a_2, ...]``.
    """

    quotients: tuple[int, ...]
    p: tuple[int, ...]
    q: tuple[int, ...]
    provenance: str = EXACT
    terminal: bool = False
    note: str = ""

    @classmethod
    def from_quotients(cls, quotients: Sequence[int], **kw) -> "ConvergentTable":
        p_prev, p = 1, 0
        q_prev, q = 0, 1
        ps, qs = [p], [q]
        for a in quotients:
            p_prev, p = p, a * p + p_prev
            q_prev, q = q, a * q + q_prev
            ps.append(p)
            qs.append(q)
        return cls(tuple(int(a) for a in quotients), tuple(ps), tuple(qs), **kw)

    @property
    def depth(self) -> int:
        return len(self.quotients)

    def convergent(self, n: int) -> Fraction:
        return Fraction(self.p[n], self.q[n])

    def check_invariants(self) -> None:
        """Recurrence, determinant identity and monotonicity, in exact integers."""
        q_prev, p_prev = 0, 1
        for n, a in enumerate(self.quotients, start=1):
            if a < 1:
                raise AssertionError(f"a_{n} = {a} < 1")
            if self.q[n] != a * self.q[n - 1] + (self.q[n - 2] if n >= 2 else q_prev):
                raise AssertionError(f"q recurrence broken at n = {n}")
            if self.p[n] != a * self.p[n - 1] + (self.p[n - 2] if n >= 2 else p_prev):
                raise AssertionError(f"p recurrence broken at n = {n}")
            det = self.p[n] * self.q[n - 1] - self.p[n - 1] * self.q[n]
            if det != (-1) ** (n - 1):
                raise AssertionError(f"determinant identity fails at n = {n}: {det}")
            if n >= 2 and not self.q[n] > self.q[n - 1]:
                raise AssertionError(f"q not increasing at n = {n}")

    def rows(self) -> list[tuple[int, int, float, float]]:
        """``(n, q_n, ratio_n, partial_sum_n)`` for every n with q_{n+1} known."""
        out = []
        ratios = []
        for n in range(self.depth):
            ratios.append(_ratio(self.q[n + 1], self.q[n]))
            out.append((n, self.q[n], ratios[-1], math.fsum(ratios)))
        return out


def _log_int(n: int) -> float:
    """Natural log of a positive integer of any size."""
    if n < 2**1000:
        return math.log(n)
    shift = n.bit_length() - 64
    return math.log(n >> shift) + shift * math.log(2)


def _ratio(q_next: int, q: int) -> float:
    # log(q_{n+1}) / q_n without converting a huge q_n to float
    if q < 2**1000:
        return _log_int(q_next) / q
    return math.exp(math.log(_log_int(q_next)) - _log_int(q))


def cf_expand(x: AlphaInput, depth: int) -> ConvergentTable:
    """Expand ``x mod 1`` to at most ``depth`` partial quotients.

    Rationals terminate exactly (``terminal=True``). Decimal strings stop as soon
    as their declared precision can no longer certify a quotient and are then
    flagged ``precision-limited``; an explicit quotient list shorter than
    ``depth`` is flagged the same way.
    """
    if depth < 1:
        raise ConfigError(f"depth must be positive, got {depth}")
    quotients: list[int] = []
    gen = x.quotients()
    for a in gen:
        quotients.append(a)
        if len(quotients) == depth:
            break
    n = len(quotients)
    if isinstance(x, Rational):
        return ConvergentTable.from_quotients(quotients, terminal=n < depth or _rational_done(x, quotients))
    if n < depth:
        if isinstance(x, DecimalString):
            if n == 0:
                raise PrecisionExhausted(
                    f"{x.describe()}: precision exhausted before depth 1"
                )
            return ConvergentTable.from_quotients(
                quotients, provenance=PRECISION_LIMITED, note=f"precision-limited at depth {n}"
            )
        if isinstance(x, Quotients):
            return ConvergentTable.from_quotients(
                quotients, provenance=PRECISION_LIMITED, note=f"quotient list ends at depth {n}"
            )
    return ConvergentTable.from_quotients(quotients)


def _rational_done(x: Rational, quotients: list[int]) -> bool:
    return ConvergentTable.from_quotients(quotients).convergent(len(quotients)) == x.reduced()


def bruno_sum_partial(cf: ConvergentTable, N: int) -> float:
    """``sum_{n=0}^{N} log(q_{n+1}) / q_n`` (natural logarithm)."""
    if N < 0 or N + 1 > cf.depth:
        raise DepthError(f"N = {N} needs q_{N + 1} but table depth is {cf.depth}")
    return math.fsum(_ratio(cf.q[n + 1], cf.q[n]) for n in range(N + 1))


def russmann_sequence(cf: ConvergentTable, N: int) -> np.ndarray:
    """``log(q_{n+1}) / q_n`` for ``n = 0..N``."""
    if N < 0 or N + 1 > cf.depth:
        raise DepthError(f"N = {N} needs q_{N + 1} but table depth is {cf.depth}")
    return np.array([_ratio(cf.q[n + 1], cf.q[n]) for n in range(N + 1)])


@dataclass(frozen=True)
class SequenceSummary:
    sup: float
    last: float
    slope: float


def summarize_sequence(seq: Sequence[float], tail: int = 4) -> SequenceSummary:
    """sup, last value and least-squares slope of the last ``tail`` entries."""
    seq = np.asarray(seq, dtype=float)
    t = seq[-tail:]
    slope = float(np.polyfit(np.arange(len(t)), t, 1)[0]) if len(t) >= 2 else 0.0
    return SequenceSummary(float(seq.max()), float(seq[-1]), slope)


@dataclass(frozen=True)
class GrowthSpec:
    """Target for ``log(q_{n+1}) / q_n`` used to build Liouville-type numbers.

    kind: ``constant`` (c), ``log`` (c / log(n+2)), ``square`` (c / (n+1)^2)
    or ``table`` (explicit values indexed by n).
    """

    kind: str = "constant"
    c: float = 1.0
    table: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in ("constant", "log", "square", "table"):
            raise ConfigError(f"unknown growth kind {self.kind!r}")
        if self.kind == "table":
            if not self.table or any(r <= 0 for r in self.table):
                raise ConfigError("growth table must be non-empty and positive")
        elif not self.c > 0:
            raise ConfigError("growth constant c must be positive")

    def ratio(self, n: int, q: int) -> float:
        if self.kind == "constant":
            return self.c
        if self.kind == "log":
            return self.c / math.log(n + 2)
        if self.kind == "square":
            return self.c / (n + 1) ** 2
        if n >= len(self.table):
            raise DepthError(f"growth table has no entry for n = {n}")
        return self.table[n]


def _next_quotient(r: float, q: int, digit_budget: int) -> int | None:
    """max(1, round(exp(r q) / q)), or None when the result would bust the budget."""
    if r * q / math.log(10) > digit_budget:
        return None
    log10_size = r * q / math.log(10) - math.log10(q)
    if log10_size < 15:
        return max(1, round(math.exp(r * q) / q))
    with mpmath.workdps(int(log10_size) + 30):
        return max(1, int(mpmath.nint(mpmath.exp(mpmath.mpf(r) * q) / q)))


def construct_alpha(
    spec: GrowthSpec,
    depth: int,
    digit_budget: int = DEFAULT_DIGIT_BUDGET,
) -> tuple[ConvergentTable, Rational]:
    """Build quotients so that ``log(q_{n+1})/q_n`` tracks ``spec.ratio(n, q_n)``.

    ``a_1 = 1``; afterwards ``a_{n+1} = max(1, round(exp(r q_n) / q_n))``.
    If the next denominator would exceed ``digit_budget`` decimal digits the table
    is truncated and flagged ``precision-limited``. Returns the table together
    with its last convergent as an exact rational.
    """
    if depth < 2:
        raise ConfigError(f"construct_alpha needs depth >= 2, got {depth}")
    quotients = [1]
    q_prev, q = 1, 1
    note = ""
    for n in range(1, depth):
        a = _next_quotient(spec.ratio(n, q), q, digit_budget)
        if a is None:
            note = f"truncated at depth {len(quotients)}: q_{n + 1} exceeds {digit_budget} digits"
            break
        quotients.append(a)
        q_prev, q = q, a * q + q_prev
    provenance = PRECISION_LIMITED if note else EXACT
    table = ConvergentTable.from_quotients(quotients, provenance=provenance, note=note)
    return table, Rational(table.p[-1], table.q[-1])


def ratio_bound(table: ConvergentTable, n: int) -> float:
    """``log 2 / q_n + |log(1 + q_{n-1} / (a_{n+1} q_n))|``."""
    a = table.quotients[n]  # a_{n+1}
    q, q_prev = table.q[n], table.q[n - 1] if n >= 1 else 0
    return math.log(2) / q + abs(math.log1p(q_prev / (a * q)))
