"""Worst small divisor ``Psi_omega(Q)`` by lattice scan, and the BR / s0 series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

import mpmath
import numpy as np

from ..errors import ConfigError, ResonanceError
from .alpha import DecimalString, Quotients, Rational, Surd

Component = Union[int, float, Fraction, Rational, Surd, Quotients, DecimalString]

MP_DPS = 60


@dataclass(frozen=True)
class FrequencyVector:
    """``omega`` in R^n with a lattice norm (``l1`` default, or ``linf``).

    Components may be floats or exact values (ints, Fractions, rationals,
    quadratic surds). With no float component the scan runs in exact rational
    arithmetic, or in ``MP_DPS``-digit arithmetic when a surd is present.
    """

    components: tuple
    norm: str = "l1"

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) < 2:
            raise ConfigError("frequency vector needs dimension n >= 2")
        if self.norm not in ("l1", "linf"):
            raise ConfigError(f"unknown lattice norm {self.norm!r}")

    @property
    def n(self) -> int:
        return len(self.components)

    @cached_property
    def mode(self) -> str:
        if any(isinstance(c, float) for c in self.components):
            return "float"
        if all(isinstance(c, (int, Fraction, Rational)) for c in self.components):
            return "exact"
        return "mp"

    def exact_components(self) -> tuple:
        out = []
        for c in self.components:
            if isinstance(c, Rational):
                out.append(c.fraction)
            elif isinstance(c, (int, Fraction)):
                out.append(Fraction(c))
            elif isinstance(c, float):
                out.append(c)
            else:
                out.append(c.mpf(MP_DPS))
        return tuple(out)

    def as_floats(self) -> np.ndarray:
        vals = []
        for c in self.exact_components():
            vals.append(float(c))
        return np.array(vals)

    def lattice_norm(self, k: Sequence[int]) -> int:
        return sum(abs(x) for x in k) if self.norm == "l1" else max(abs(x) for x in k)

    def describe(self) -> str:
        parts = []
        for c in self.components:
            parts.append(c.describe() if hasattr(c, "describe") else repr(c))
        return f"omega=({', '.join(parts)}) norm={self.norm}"


@dataclass(frozen=True)
class PsiTable:
    """Rows ``(Q, Psi(Q), k*)`` for ``Q = 1..Q_max``."""

    Q: tuple[int, ...]
    psi: np.ndarray
    log_psi: np.ndarray
    kstar: tuple[tuple[int, ...], ...]

    def rows(self):
        return list(zip(self.Q, self.psi.tolist(), self.kstar))


def half_lattice(n: int, Q: int, norm: str) -> np.ndarray:
    """Integer vectors ``0 < |k| <= Q`` whose first nonzero entry is positive."""
    axes = [np.arange(-Q, Q + 1)] * n
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    size = np.abs(grid).sum(axis=1) if norm == "l1" else np.abs(grid).max(axis=1)
    grid = grid[(size > 0) & (size <= Q)]
    nz = grid != 0
    first = grid[np.arange(len(grid)), nz.argmax(axis=1)]
    return grid[first > 0]


def _divisors(omega: FrequencyVector, ks: np.ndarray) -> tuple[list, np.ndarray]:
    """``|k . omega|`` per row, plus float logs; raises on resonance."""
    comps = omega.exact_components()
    if omega.mode == "float":
        w = np.array([float(c) for c in comps])
        vals = np.abs(ks @ w)
        scale = np.abs(ks) @ np.abs(w)
        bad = vals <= 4 * np.finfo(float).eps * scale
        if bad.any():
            raise ResonanceError(ks[np.argmax(bad)])
        return vals.tolist(), np.log(vals)
    vals = []
    logs = np.empty(len(ks))
    if omega.mode == "exact":
        for i, k in enumerate(ks.tolist()):
            v = abs(sum(kk * c for kk, c in zip(k, comps)))
            if v == 0:
                raise ResonanceError(k)
            vals.append(v)
            logs[i] = math.log(v.numerator) - math.log(v.denominator)
        return vals, logs
    with mpmath.workdps(MP_DPS):
        tiny = mpmath.mpf(10) ** (-(MP_DPS - 10))
        for i, k in enumerate(ks.tolist()):
            v = abs(mpmath.fsum(kk * c for kk, c in zip(k, comps)))
            if v < tiny:
                raise ResonanceError(k)
            vals.append(v)
            logs[i] = float(mpmath.log(v))
    return vals, logs


def psi_table(omega: FrequencyVector, Q_max: int) -> PsiTable:
    """Brute-force lattice scan. Ties go to the lexicographically smallest ``k``
    among representatives whose first nonzero component is positive."""
    if Q_max < 1:
        raise ConfigError(f"Q must be >= 1, got {Q_max}")
    ks = half_lattice(omega.n, Q_max, omega.norm)
    vals, logs = _divisors(omega, ks)
    size = np.abs(ks).sum(axis=1) if omega.norm == "l1" else np.abs(ks).max(axis=1)
    # lexicographic order first, then a stable sort on norm keeps it within levels
    order = np.lexsort(ks.T[::-1])
    order = order[np.argsort(size[order], kind="stable")]
    best_v, best_log, best_k = None, None, None
    Qs, psis, lps, kstars = [], [], [], []
    idx = 0
    for Q in range(1, Q_max + 1):
        while idx < len(order) and size[order[idx]] == Q:
            j = order[idx]
            k = tuple(int(x) for x in ks[j])
            v = vals[j]
            if best_v is None or v < best_v or (v == best_v and k < best_k):
                best_v, best_log, best_k = v, logs[j], k
            idx += 1
        Qs.append(Q)
        lps.append(-best_log)
        psis.append(float(1 / best_v) if not isinstance(best_v, float) else 1.0 / best_v)
        kstars.append(best_k)
    return PsiTable(tuple(Qs), np.array(psis), np.array(lps), tuple(kstars))


def psi(omega: FrequencyVector, Q: int) -> tuple[float, tuple[int, ...]]:
    """``Psi_omega(Q) = max |k.omega|^-1`` over ``0 < |k| <= Q`` and a minimiser."""
    t = psi_table(omega, Q)
    return float(t.psi[-1]), t.kstar[-1]


def br_integral_series(table: PsiTable) -> np.ndarray:
    """Cumulative trapezoid of ``ln Psi(Q) / Q^2`` on integer nodes; entry Q-1
    is the integral from 1 to Q."""
    Q = np.asarray(table.Q, dtype=float)
    f = table.log_psi / Q**2
    return np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]))])


def br_integral_partial(omega: FrequencyVector, Q_max: int) -> float:
    """Trapezoidal ``int_1^{Q_max} ln Psi(Q) / Q^2 dQ`` on integer nodes."""
    if Q_max < 2:
        raise ConfigError(f"br_integral_partial needs Q_max >= 2, got {Q_max}")
    return float(br_integral_series(psi_table(omega, Q_max))[-1])


def s0_series(table: PsiTable) -> np.ndarray:
    return table.log_psi / np.asarray(table.Q, dtype=float)


def s0_estimate(omega: FrequencyVector, Q_max: int) -> float:
    """``max_{Q <= Q_max} ln Psi(Q) / Q``: finite-horizon proxy for the limsup."""
    return float(s0_series(psi_table(omega, Q_max)).max())
