"""Circle-map lifts ``u(theta) = theta + alpha + v(theta)``, rotation numbers and
a Fourier quasi-Newton probe for an analytic conjugacy to the rotation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .analytic import (
    AmplificationTable,
    FourierSeries,
    RadiusFit,
    analyticity_radius,
    solve_cohomological,
)
from .errors import CertificationError, ConfigError, NumericError

ORIENTATION_GRID = 2048
DIVERGENCE_AMPLIFICATION = 1e12


class RotationMismatch(NumericError):
    """The map's rotation number is not the target rotation of the probe."""


def certify_orientation(v: FourierSeries, grid: int = ORIENTATION_GRID) -> float:
    """Certified lower bound of ``1 + v'`` on the circle.

    Grid minimum minus ``(h/2) sup|v''|``, with ``sup|v''|`` bounded by the
    coefficient sum. Raises :class:`CertificationError` when not positive.
    """
    th = np.arange(grid) / grid
    dv = v.derivative()
    grid_min = float((1.0 + dv.eval(th)).min())
    slack = 0.5 / grid * v.derivative_bound(2)
    bound = grid_min - slack
    if bound <= 0:
        raise CertificationError(
            f"orientation not certifiable: min(1 + v') >= {grid_min:.6g} - {slack:.3g} <= 0"
        )
    return bound


@dataclass(frozen=True)
class RotationEstimate:
    rho: float
    error: float
    n_iter: int


class CircleMapLift:
    """Lift ``u(theta) = theta + alpha + v(theta)`` of an analytic circle map.

    ``alpha`` may be a float or any exact value accepted by the cohomological
    solver (Fraction, rational, surd); the exact form is kept for divisor
    computations while iteration uses its float value.
    """

    def __init__(self, alpha, v: FourierSeries | None = None):
        v = FourierSeries.zeros(1, 0) if v is None else v
        if v.n != 1 or not v.real:
            raise ConfigError("circle perturbation must be a real 1-D series")
        self.alpha = alpha
        self.alpha_f = float(alpha)
        self.v = v
        self.min_derivative = certify_orientation(v)
        ks, cs = v.sparse()
        pos = ks[:, 0] > 0
        self._k = ks[pos, 0].astype(float)
        # c e^{ix} + conj(c) e^{-ix} = 2 Re c cos x - 2 Im c sin x
        self._cos = 2 * cs[pos].real
        self._sin = -2 * cs[pos].imag
        self._c0 = float(v.mean.real)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return theta + self.alpha_f + self.v.eval(theta)

    def derivative(self, theta):
        return 1.0 + self.v.derivative().eval(np.asarray(theta, dtype=float))

    def orbit(self, theta0: float, n: int) -> np.ndarray:
        """Lifted iterates ``theta_0, u(theta_0), ..., u^n(theta_0)``."""
        return _kernels.circle_orbit(float(theta0), int(n), self.alpha_f, self._k, self._cos, self._sin, self._c0)

    def rotation_number(self, theta0: float = 0.0, n: int = 2**16, tol: float | None = None,
                        max_n: int = 2**22) -> RotationEstimate:
        """Birkhoff quotient with one Richardson step between ``n`` and ``n // 2``.

        ``rho = 2 rho_n - rho_{n/2}``; ``error = |rho_n - rho_{n/2}|``. With
        ``tol`` the horizon is doubled until ``error <= tol`` or ``max_n``.
        """
        if n < 1000:
            raise ConfigError("rotation_number needs at least 1000 iterations")
        while True:
            orb = self.orbit(theta0, n)
            r_full = (orb[n] - theta0) / n
            r_half = (orb[n // 2] - theta0) / (n // 2)
            err = abs(r_full - r_half)
            if tol is None or err <= tol or 2 * n > max_n:
                return RotationEstimate(float(2 * r_full - r_half), float(err), n)
            n *= 2


def orbit_csv_rows(orbit: np.ndarray) -> list[tuple[int, float]]:
    return [(j, float(x)) for j, x in enumerate(orbit)]


@dataclass
class ConjugacyReport:
    alpha: float
    K: int
    w: FourierSeries
    rotation_shift: float
    residual: float
    residual_history: list = field(default_factory=list)
    amplification: AmplificationTable | None = None
    verdict: str = "stalled"
    reason: str = ""
    iterations: int = 0
    radius: RadiusFit | None = None

    @property
    def amplification_max(self) -> float:
        return self.amplification.max() if self.amplification is not None else 0.0

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "K": self.K,
            "verdict": self.verdict,
            "reason": self.reason,
            "iterations": self.iterations,
            "residual": self.residual,
            "residual_history": list(self.residual_history),
            "rotation_shift": self.rotation_shift,
            "amplification_max": self.amplification_max,
            "analyticity_radius": None if self.radius is None else self.radius.s_est,
            "radius_fit_residual": None if self.radius is None else self.radius.residual,
            "w": self.w.to_dict(),
        }


def _monotone_tail(hist: list, m: int = 3) -> bool:
    tail = hist[-m:]
    return all(b <= a for a, b in zip(tail, tail[1:]))


def conjugacy_probe(
    cmap: CircleMapLift,
    K: int = 64,
    max_iter: int = 30,
    tol: float = 1e-11,
    rot_tol: float = 1e-5,
    check_rotation: bool = True,
) -> ConjugacyReport:
    """Look for ``h = id + w`` with ``u(h(theta)) = h(theta + alpha) + lambda``.

    Each step solves the cohomological equation for the mean-free part of the
    current residual ``E = u o h - h o R_alpha`` and adds the solution to ``w``.
    ``lambda`` (reported as ``rotation_shift``) absorbs the mean of ``E``; it
    converges to ``rho(u) - alpha``.

    Verdicts: ``converged`` (residual <= tol, non-increasing over the last three
    iterations), ``diverged`` (three consecutive increases, or an amplification
    above 1e12 in the cutoff box), ``stalled`` otherwise. None of these proves
    or disproves the existence of a conjugacy.
    """
    if check_rotation:
        est = cmap.rotation_number(n=2**14)
        gap = abs(est.rho - cmap.alpha_f)
        if gap > rot_tol + 2 * est.error:
            raise RotationMismatch(
                f"rotation number {est.rho:.12g} differs from alpha {cmap.alpha_f:.12g} by {gap:.3g}"
            )
    L = max(64, 4 * K)
    th = np.arange(L) / L
    w = FourierSeries.zeros(1, K)
    hist: list[float] = []
    lam = 0.0
    table = None
    verdict, reason = "stalled", f"max_iter = {max_iter} reached"
    increases = 0
    it = 0
    for it in range(max_iter + 1):
        wt = w.eval(th)
        E = wt + cmap.v.eval(th + wt) - w.eval(th + cmap.alpha_f)
        Ehat = FourierSeries.from_samples(E, K)
        lam = float(Ehat.mean.real)
        res = float(np.abs(E - lam).max())
        if hist and res > hist[-1]:
            increases += 1
        else:
            increases = 0
        hist.append(res)
        if res <= tol and _monotone_tail(hist):
            verdict, reason = "converged", f"residual {res:.3g} <= tol {tol:.3g}"
            break
        if increases >= 3:
            verdict, reason = "diverged", "residual grew over 3 consecutive iterations"
            break
        if it == max_iter:
            break
        phi, table = solve_cohomological(Ehat.shift_mean(-lam), cmap.alpha, K)
        w = w + phi
        if table.max() > DIVERGENCE_AMPLIFICATION:
            verdict = "diverged"
            reason = f"amplification {table.max():.3g} exceeds {DIVERGENCE_AMPLIFICATION:.0e}"
            it += 1
            break
    if table is None:
        # the first residual was already below tolerance; still record the divisors
        _, table = solve_cohomological(FourierSeries.zeros(1, K), cmap.alpha, K)
    radius = None
    try:
        radius = analyticity_radius(w, floor=1e-13)
    except NumericError:
        pass
    return ConjugacyReport(
        alpha=cmap.alpha_f,
        K=K,
        w=w,
        rotation_shift=lam,
        residual=hist[-1],
        residual_history=hist,
        amplification=table,
        verdict=verdict,
        reason=reason,
        iterations=it,
        radius=radius,
    )


def tune_rotation(alpha, v: FourierSeries, K: int = 64, rounds: int = 5, tol: float = 1e-14) -> CircleMapLift:
    """Shift the mean of ``v`` so that the lift has rotation number ``alpha``.

    Uses the probe's counterterm; only meaningful when the probe converges.
    """
    for _ in range(rounds):
        cmap = CircleMapLift(alpha, v)
        rep = conjugacy_probe(cmap, K=K, check_rotation=False)
        if rep.verdict != "converged":
            raise NumericError(f"cannot tune rotation: probe {rep.verdict} ({rep.reason})")
        if abs(rep.rotation_shift) <= tol:
            return cmap
        v = v.shift_mean(-rep.rotation_shift)
    return CircleMapLift(alpha, v)
