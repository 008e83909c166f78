"""Trigonometric polynomials on the n-torus and the cohomological equation.

Convention: ``f(theta) = sum_k c_k exp(2 pi i k . theta)`` with ``theta`` in
``R^n / Z^n`` and ``k`` in the box ``|k|_inf <= K``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import mpmath
import numpy as np

from .errors import ConfigError, NumericError, ResonanceError

IMAG_TOL = 1e-12
DIVISOR_FLOOR = 1e-300
DEFAULT_CUTOFF = 64


class RealnessError(NumericError):
    """A series flagged real has non-conjugate-symmetric coefficients."""


def _box(n: int, K: int) -> np.ndarray:
    axes = [np.arange(-K, K + 1)] * n
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)


class FourierSeries:
    """Truncated Fourier series with a dense coefficient box of side ``2K+1``.

    ``real=True`` asserts ``c_{-k} = conj(c_k)`` (checked at construction, to
    ``IMAG_TOL`` relative to the largest coefficient).
    """

    __slots__ = ("coeffs", "real", "_sparse")

    def __init__(self, coeffs: np.ndarray, real: bool = True):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim < 1 or len(set(coeffs.shape)) != 1 or coeffs.shape[0] % 2 == 0:
            raise ConfigError(f"coefficient box must be (2K+1,)*n, got {coeffs.shape}")
        coeffs = coeffs.copy()
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.real = real
        self._sparse = None
        if real:
            flipped = np.conj(coeffs[(slice(None, None, -1),) * coeffs.ndim])
            scale = max(1.0, float(np.abs(coeffs).max(initial=0.0)))
            if np.abs(coeffs - flipped).max(initial=0.0) > IMAG_TOL * scale:
                raise RealnessError("series flagged real but c_-k != conj(c_k)")

    # construction helpers

    @classmethod
    def zeros(cls, n: int = 1, K: int = 0) -> "FourierSeries":
        return cls(np.zeros((2 * K + 1,) * n, dtype=complex))

    @classmethod
    def from_modes(
        cls, modes: Mapping, n: int | None = None, K: int | None = None, real: bool = True
    ) -> "FourierSeries":
        """Build from ``{k: c_k}``; ``k`` is an int (n = 1) or a tuple.

        With ``real=True`` only one of each pair ``k, -k`` need be given; the
        conjugate partner is filled in (a given pair must already agree).
        """
        items = [((k,) if np.isscalar(k) else tuple(k), complex(c)) for k, c in modes.items()]
        if n is None:
            n = len(items[0][0]) if items else 1
        if K is None:
            K = max((max(abs(x) for x in k) for k, _ in items), default=0)
        arr = np.zeros((2 * K + 1,) * n, dtype=complex)
        given = set()
        for k, c in items:
            if len(k) != n:
                raise ConfigError(f"mode {k} does not have dimension {n}")
            if max(abs(x) for x in k) > K:
                raise ConfigError(f"mode {k} exceeds cutoff K = {K}")
            arr[tuple(x + K for x in k)] = c
            given.add(k)
        if real:
            for k, c in items:
                mk = tuple(-x for x in k)
                if mk not in given:
                    arr[tuple(x + K for x in mk)] = np.conj(c)
            zero = (K,) * n
            arr[zero] = arr[zero].real
        return cls(arr, real=real)

    @classmethod
    def cosine(cls, amplitude: float, k: int | Sequence[int] = 1, K: int | None = None) -> "FourierSeries":
        """``amplitude * cos(2 pi k . theta)``."""
        k = (k,) if np.isscalar(k) else tuple(k)
        return cls.from_modes({k: amplitude / 2}, n=len(k), K=K)

    @classmethod
    def sine(cls, amplitude: float, k: int | Sequence[int] = 1, K: int | None = None) -> "FourierSeries":
        """``amplitude * sin(2 pi k . theta)``."""
        k = (k,) if np.isscalar(k) else tuple(k)
        return cls.from_modes({k: -0.5j * amplitude}, n=len(k), K=K)

    @classmethod
    def from_samples(cls, values: np.ndarray, K: int, real: bool = True) -> "FourierSeries":
        """Project samples on the uniform grid ``j / L`` (per axis) onto ``|k|_inf <= K``."""
        values = np.asarray(values)
        L = values.shape[0]
        if 2 * K + 1 > L:
            raise ConfigError(f"grid of {L} points cannot resolve cutoff K = {K}")
        c = np.fft.fftn(values) / values.size
        c = np.fft.fftshift(c)
        mid = L // 2
        sl = (slice(mid - K, mid + K + 1),) * values.ndim
        out = c[sl]
        if real:
            out = 0.5 * (out + np.conj(out[(slice(None, None, -1),) * values.ndim]))
        return cls(out, real=real)

    @classmethod
    def from_function(cls, f, n: int, K: int, L: int | None = None, real: bool = True) -> "FourierSeries":
        L = L or 4 * K + 4
        grid = np.stack(np.meshgrid(*[np.arange(L) / L] * n, indexing="ij"), axis=-1)
        return cls.from_samples(f(grid), K, real=real)

    # structure

    @property
    def n(self) -> int:
        return self.coeffs.ndim

    @property
    def K(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    def __getitem__(self, k) -> complex:
        k = (k,) if np.isscalar(k) else tuple(k)
        if max(abs(x) for x in k) > self.K:
            return 0j
        return complex(self.coeffs[tuple(x + self.K for x in k)])

    @property
    def mean(self) -> complex:
        return self[(0,) * self.n]

    def sparse(self) -> tuple[np.ndarray, np.ndarray]:
        """``(ks, cs)`` for the nonzero coefficients only."""
        if self._sparse is None:
            idx = np.argwhere(self.coeffs != 0)
            ks = idx - self.K
            cs = self.coeffs[tuple(idx.T)] if len(idx) else np.zeros(0, dtype=complex)
            self._sparse = (ks.astype(np.int64), np.asarray(cs))
        return self._sparse

    def modes(self) -> Iterable[tuple[tuple[int, ...], complex]]:
        ks, cs = self.sparse()
        for k, c in zip(ks.tolist(), cs.tolist()):
            yield tuple(k), c

    def resize(self, K: int) -> "FourierSeries":
        """Truncate to (or zero-pad up to) cutoff ``K``."""
        if K == self.K:
            return self
        if K < self.K:
            d = self.K - K
            return FourierSeries(self.coeffs[(slice(d, d + 2 * K + 1),) * self.n], self.real)
        d = K - self.K
        return FourierSeries(np.pad(self.coeffs, d), self.real)

    def _binary(self, other: "FourierSeries", sign: float) -> "FourierSeries":
        if other.n != self.n:
            raise ConfigError("dimension mismatch")
        K = max(self.K, other.K)
        return FourierSeries(self.resize(K).coeffs + sign * other.resize(K).coeffs, self.real and other.real)

    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        return self._binary(other, 1.0)

    def __sub__(self, other: "FourierSeries") -> "FourierSeries":
        return self._binary(other, -1.0)

    def __mul__(self, scalar: float) -> "FourierSeries":
        real = self.real and np.isreal(scalar)
        return FourierSeries(self.coeffs * scalar, real)

    __rmul__ = __mul__

    def __neg__(self) -> "FourierSeries":
        return self * -1.0

    def shift_mean(self, value: float) -> "FourierSeries":
        arr = self.coeffs.copy()
        arr[(self.K,) * self.n] += value
        return FourierSeries(arr, self.real)

    def derivative(self, axis: int = 0) -> "FourierSeries":
        k = np.arange(-self.K, self.K + 1)
        shape = [1] * self.n
        shape[axis] = -1
        return FourierSeries(self.coeffs * (2j * np.pi * k.reshape(shape)), self.real)

    def gradient(self) -> list["FourierSeries"]:
        return [self.derivative(i) for i in range(self.n)]

    def derivative_bound(self, order: int) -> float:
        """``sum |c_k| (2 pi |k|_1)^order``: bounds every ``order``-th partial derivative."""
        ks, cs = self.sparse()
        return float(np.sum(np.abs(cs) * (2 * np.pi * np.abs(ks).sum(axis=1)) ** order))

    # evaluation

    def eval(self, theta) -> np.ndarray:
        """Evaluate at points ``theta`` of shape ``(..., n)`` (or ``(...)`` when n = 1)."""
        theta = np.asarray(theta, dtype=float)
        if self.n == 1 and (theta.ndim == 0 or theta.shape[-1] != 1):
            theta = theta[..., None]
        if theta.shape[-1] != self.n:
            raise ConfigError(f"points must have trailing dimension {self.n}")
        ks, cs = self.sparse()
        if len(cs) == 0:
            out = np.zeros(theta.shape[:-1], dtype=complex)
        else:
            out = np.exp(2j * np.pi * (theta @ ks.T)) @ cs
        if not self.real:
            return out
        scale = max(1.0, float(np.abs(cs).sum()))
        if np.abs(out.imag).max(initial=0.0) > IMAG_TOL * scale:
            raise RealnessError("imaginary residue above tolerance")
        return out.real

    __call__ = eval

    # serialisation

    def to_rows(self) -> list[tuple]:
        """``(k_1, ..., k_n, re, im)`` for every nonzero coefficient, lexicographic in k."""
        return [(*k, c.real, c.imag) for k, c in sorted(self.modes())]

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence], n: int, K: int | None = None, real: bool = True) -> "FourierSeries":
        modes = {}
        for r in rows:
            k = tuple(int(x) for x in r[:n])
            modes[k] = complex(float(r[n]), float(r[n + 1]))
        if real:
            # every row is given explicitly; validate rather than fill
            arr = cls.from_modes(modes, n=n, K=K, real=False).coeffs
            return cls(arr, real=True)
        return cls.from_modes(modes, n=n, K=K, real=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "K": self.K,
            "real": self.real,
            "modes": [{"k": list(k), "re": c.real, "im": c.imag} for k, c in sorted(self.modes())],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FourierSeries":
        rows = [(*m["k"], m["re"], m["im"]) for m in d["modes"]]
        return cls.from_rows(rows, n=int(d["n"]), K=int(d["K"]), real=bool(d.get("real", True)))

    def __repr__(self) -> str:
        nz = len(self.sparse()[1])
        return f"FourierSeries(n={self.n}, K={self.K}, nonzero={nz}, real={self.real})"


def norm_s(f: FourierSeries, s: float) -> float:
    """``sum_k |c_k| exp(2 pi s |k|_1)``, an upper bound of ``sup |f|`` on the
    complex strip ``|Im theta_i| < s``."""
    if s < 0:
        raise ConfigError(f"strip width must be >= 0, got {s}")
    ks, cs = f.sparse()
    return float(np.sum(np.abs(cs) * np.exp(2 * np.pi * s * np.abs(ks).sum(axis=1))))


# cohomological equation


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) or hasattr(x, "exact_value") or isinstance(x, mpmath.mpf)


def _to_exact(x):
    if isinstance(x, (int, Fraction, mpmath.mpf)):
        return x
    v = x.exact_value()
    return v if isinstance(v, Fraction) else x.mpf(60)


def _products(freq, ks: np.ndarray, reduce_mod1: bool) -> np.ndarray:
    """``k . freq`` (optionally reduced to ``[-1/2, 1/2]``) as floats.

    Exact inputs (ints, Fractions, rationals, surds) are multiplied and reduced
    before rounding, so tiny fractional parts near resonance are resolved.
    """
    comps = (freq,) if np.isscalar(freq) or not isinstance(freq, (tuple, list, np.ndarray)) else tuple(freq)
    if len(comps) != ks.shape[1]:
        raise ConfigError(f"frequency has {len(comps)} components, series has {ks.shape[1]}")
    if not all(_is_exact(c) for c in comps):
        w = np.array([float(c) for c in comps])
        x = ks @ w
        return x - np.round(x) if reduce_mod1 else x
    comps = [_to_exact(c) for c in comps]
    out = np.empty(len(ks))
    with mpmath.workdps(60):
        for i, k in enumerate(ks.tolist()):
            v = sum(kk * c for kk, c in zip(k, comps))
            if reduce_mod1:
                v = v - (math.floor(v + Fraction(1, 2)) if isinstance(v, Fraction) else mpmath.nint(v))
            out[i] = float(v)
    return out


def divisors(freq, ks: np.ndarray, kind: str = "discrete") -> np.ndarray:
    """``exp(2 pi i k.alpha) - 1`` (discrete) or ``2 pi i k.omega`` (continuous)."""
    if kind == "discrete":
        x = _products(freq, ks, reduce_mod1=True)
        # 2i sin(pi x) e^{i pi x}: no cancellation when x is small
        return 2j * np.sin(np.pi * x) * np.exp(1j * np.pi * x)
    if kind == "continuous":
        return 2j * np.pi * _products(freq, ks, reduce_mod1=False)
    raise ConfigError(f"kind must be 'discrete' or 'continuous', got {kind!r}")


@dataclass(frozen=True)
class AmplificationTable:
    """``|phi_k| / |g_k| = 1 / |divisor_k|`` over the half box of retained modes
    (first nonzero component positive; ``-k`` has the same value)."""

    ks: np.ndarray
    amp: np.ndarray
    resonant: tuple = ()

    def max(self) -> float:
        return float(self.amp.max(initial=0.0))

    def at(self, k) -> float:
        k = np.atleast_1d(k)
        if k[np.flatnonzero(k)[0]] < 0:
            k = -k
        hit = np.flatnonzero((self.ks == k).all(axis=1))
        if not len(hit):
            raise KeyError(tuple(k))
        return float(self.amp[hit[0]])

    def rows(self) -> list[tuple]:
        return [(tuple(k), a) for k, a in zip(self.ks.tolist(), self.amp.tolist())]


def _half_box(n: int, K: int) -> np.ndarray:
    ks = _box(n, K)
    nz = ks != 0
    keep = nz.any(axis=1)
    ks = ks[keep]
    first = ks[np.arange(len(ks)), nz[keep].argmax(axis=1)]
    return ks[first > 0]


def solve_cohomological(
    g: FourierSeries,
    alpha,
    K: int | None = None,
    kind: str = "discrete",
    mean_tol: float = 1e-12,
) -> tuple[FourierSeries, AmplificationTable]:
    """Solve ``phi(theta + alpha) - phi(theta) = g`` (discrete) or
    ``omega . grad phi = g`` (continuous) mode by mode on ``|k|_inf <= K``.

    ``phi`` has zero mean. A resonant divisor raises :class:`ResonanceError` if
    ``g`` has a nonzero coefficient there; otherwise the mode is listed in
    ``table.resonant`` and left out of the amplification values.
    """
    K = g.K if K is None else K
    g = g.resize(K)
    scale = max(1.0, float(np.abs(g.coeffs).max(initial=0.0)))
    if abs(g.mean) > mean_tol * scale:
        raise NumericError(f"cohomological equation needs zero mean, got c_0 = {g.mean:.3e}")
    n = g.n
    ks = _half_box(n, K)
    d = divisors(alpha, ks, kind)
    absd = np.abs(d)
    res = absd < DIVISOR_FLOOR
    phi = np.zeros_like(g.coeffs)
    resonant = []
    for k, dk, bad in zip(ks, d, res):
        idx = tuple(k + K)
        midx = tuple(-k + K)
        gk, gmk = g.coeffs[idx], g.coeffs[midx]
        if bad:
            if gk != 0 or gmk != 0:
                raise ResonanceError(k, f"resonant mode k = {tuple(int(x) for x in k)} within cutoff")
            resonant.append(tuple(int(x) for x in k))
            continue
        phi[idx] = gk / dk
        # divisor at -k is the conjugate of the divisor at k
        phi[midx] = gmk / np.conj(dk)
    table = AmplificationTable(ks[~res], 1.0 / absd[~res], tuple(resonant))
    return FourierSeries(phi, real=g.real), table


def cohomological_residual(phi: FourierSeries, g: FourierSeries, alpha, kind: str = "discrete",
                           samples: int = 128, seed: int = 0) -> float:
    """Max over random points of the functional-equation residual."""
    rng = np.random.default_rng(seed)
    th = rng.random((samples, phi.n))
    comps = alpha if isinstance(alpha, (tuple, list, np.ndarray)) else (alpha,)
    w = np.array([float(x) for x in comps])
    if kind == "discrete":
        lhs = phi.eval(th + w) - phi.eval(th)
    else:
        lhs = sum(wi * d.eval(th) for wi, d in zip(w, phi.gradient()))
    return float(np.abs(lhs - g.eval(th)).max())


@dataclass(frozen=True)
class RadiusFit:
    s_est: float
    residual: float
    slope: float
    modes_used: int


def analyticity_radius(f: FourierSeries, floor: float = 0.0) -> RadiusFit:
    """Least-squares fit of ``log|c_k|`` against ``|k|_1`` over nonzero modes.

    ``s_est = -slope / (2 pi)``; ``residual`` is the RMS misfit (large values
    flag non-exponential decay). ``floor`` drops modes below
    ``floor * max|c_k|`` (useful for round-off tails).
    """
    ks, cs = f.sparse()
    mags = np.abs(cs)
    keep = (np.abs(ks).sum(axis=1) > 0) & (mags > 0)
    if floor > 0 and keep.any():
        keep &= mags > floor * mags[keep].max()
    if keep.sum() < 3:
        raise NumericError("analyticity_radius needs at least 3 nonzero modes")
    x = np.abs(ks[keep]).sum(axis=1).astype(float)
    y = np.log(mags[keep])
    if np.ptp(x) == 0:
        raise NumericError("analyticity_radius needs modes at distinct |k|")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ [slope, icpt] - y) ** 2)))
    return RadiusFit(float(-slope / (2 * np.pi)), resid, float(slope), int(keep.sum()))
