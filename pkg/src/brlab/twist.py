"""Exact area-preserving twist maps on T x (-1, 1) from generating functions.

The implicit step is ``I' = I - d_theta h(theta, I')``, ``Theta = theta + d_I' h(theta, I')``.
For ``h_1 = h_0(I') + v(theta) I'`` the step is explicit:
``I' = I / u'(theta)``, ``Theta = theta + h_0'(I') + v(theta)`` with ``u' = 1 + v'``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .analytic import FourierSeries, norm_s
from .circle import RotationEstimate, certify_orientation
from .errors import CertificationError, ConfigError, ConvergenceError, DomainExit

B1_GRID = 1024


@dataclass(frozen=True)
class TwistState:
    theta: float
    I: float

    def __post_init__(self):
        if not abs(self.I) < 1.0:
            raise DomainExit(f"|I| = {abs(self.I):.6g} outside the modelled domain (-1, 1)")


class IntegrableGenerating:
    """``h_0(I')`` as a polynomial (ascending coefficients) with conditions
    (b1) ``h_0'' != 0`` of constant sign on (-1, 1) and (b2) ``h_0'(0) = alpha``."""

    def __init__(self, coeffs: Sequence[float], grid: int = B1_GRID):
        self.poly = Polynomial(np.asarray(coeffs, dtype=float))
        self.d1 = self.poly.deriv(1)
        self.d2 = self.poly.deriv(2)
        x = np.linspace(-1, 1, grid + 2)[1:-1]
        curv = self.d2(x)
        if np.any(curv == 0) or not (np.all(curv > 0) or np.all(curv < 0)):
            raise CertificationError("(b1) fails: h0'' vanishes or changes sign on (-1, 1)")
        self.twist_sign = 1 if curv[0] > 0 else -1
        self.alpha = float(self.d1(0.0))

    @classmethod
    def quadratic(cls, alpha: float, curvature: float = 1.0) -> "IntegrableGenerating":
        """``h_0(I) = alpha I + curvature I^2 / 2``."""
        return cls([0.0, float(alpha), curvature / 2])

    def __call__(self, I):
        return self.poly(I)

    def dh(self, I):
        return self.d1(I)

    def d2h(self, I):
        return self.d2(I)


class GeneratingFunction:
    """General ``h(theta, I')``, 1-periodic in theta, given by its partials.

    The implicit solver needs ``sup |d^2 h / d theta dI'| < 1``; this is checked
    on a grid at construction (with ``slack``).
    """

    def __init__(
        self,
        d_theta: Callable,
        d_I: Callable,
        d_theta_I: Callable,
        slack: float = 1e-3,
        grid: tuple[int, int] = (256, 129),
    ):
        self.d_theta = d_theta
        self.d_I = d_I
        self.d_theta_I = d_theta_I
        th = np.arange(grid[0]) / grid[0]
        Ip = np.linspace(-1, 1, grid[1] + 2)[1:-1]
        T, P = np.meshgrid(th, Ip, indexing="ij")
        self.contraction = float(np.abs(d_theta_I(T, P)).max())
        if self.contraction >= 1.0 - slack:
            raise CertificationError(
                f"contraction margin fails: sup|d2h/dtheta dI'| = {self.contraction:.6g} >= 1"
            )

    @classmethod
    def integrable(cls, h0: IntegrableGenerating) -> "GeneratingFunction":
        return cls(lambda t, p: np.zeros_like(np.asarray(p, dtype=float) + t),
                   lambda t, p: h0.dh(p) + 0 * t,
                   lambda t, p: np.zeros_like(np.asarray(p, dtype=float) + t))

    @classmethod
    def linear_perturbation(cls, h0: IntegrableGenerating, v: FourierSeries) -> "GeneratingFunction":
        """``h_1(theta, I') = h_0(I') + v(theta) I'``."""
        dv = v.derivative()
        return cls(lambda t, p: dv.eval(t) * p,
                   lambda t, p: h0.dh(p) + v.eval(t),
                   lambda t, p: dv.eval(t) + 0 * p)

    @classmethod
    def standard(cls, h0: IntegrableGenerating, eps: float) -> "GeneratingFunction":
        """``h(theta, I') = h_0(I') + eps cos(2 pi theta)`` (standard-map form)."""
        return cls(lambda t, p: -2 * np.pi * eps * np.sin(2 * np.pi * t) + 0 * p,
                   lambda t, p: h0.dh(p) + 0 * t,
                   lambda t, p: np.zeros_like(np.asarray(p, dtype=float) + t))

    def step(self, state: TwistState, tol: float = 1e-14, max_iter: int = 50) -> TwistState:
        return step_implicit(self, state, tol, max_iter)


def step_implicit(h: GeneratingFunction, state: TwistState, tol: float = 1e-14, max_iter: int = 50) -> TwistState:
    """Solve ``I' = I - d_theta h(theta, I')`` by damped Newton from ``I' = I``."""
    th, I = state.theta, state.I

    def F(p):
        return p - I + float(h.d_theta(th, p))

    p = I
    r = F(p)
    for _ in range(max_iter):
        if abs(r) <= tol:
            break
        step = -r / (1.0 + float(h.d_theta_I(th, p)))
        lam = 1.0
        outside = False
        while True:
            trial = p + lam * step
            if abs(trial) < 1.0:
                r_trial = F(trial)
                if abs(r_trial) < abs(r):
                    break
            else:
                outside = True
            lam *= 0.5
            if lam < 2.0**-30:
                if outside:
                    raise DomainExit(f"I' is driven out of (-1, 1) (residual {abs(r):.3g} at I' = {p:.6g})")
                # no decrease possible at this resolution
                trial, r_trial = p, r
                break
        if trial == p:
            break
        p, r = trial, r_trial
    if abs(r) > max(tol, 4 * np.finfo(float).eps * max(1.0, abs(I))):
        raise ConvergenceError(f"implicit step did not converge: residual {abs(r):.3g}")
    if not abs(p) < 1.0:
        raise DomainExit(f"I' = {p:.6g} left (-1, 1)")
    return TwistState(th + float(h.d_I(th, p)), p)


class ExplicitPerturbedTwistMap:
    """The map generated by ``h_1 = h_0(I') + v(theta) I'``, in explicit form."""

    def __init__(self, h0: IntegrableGenerating, v: FourierSeries, eps_budget: float | None = None, s: float = 0.0):
        if v.n != 1 or not v.real:
            raise ConfigError("perturbation v must be a real 1-D series")
        self.h0 = h0
        self.v = v
        self.dv = v.derivative()
        self.min_u_prime = certify_orientation(v)
        self.s = s
        self.v_norm = norm_s(v, s)
        self.eps_budget = eps_budget

    @property
    def alpha(self) -> float:
        return self.h0.alpha

    def u(self, theta):
        return np.asarray(theta) + self.h0.alpha + self.v.eval(theta)

    def u_prime(self, theta):
        return 1.0 + self.dv.eval(theta)

    def step_arrays(self, theta, I):
        """Vectorised step; raises :class:`DomainExit` if any image leaves the domain."""
        theta = np.asarray(theta, dtype=float)
        Ip = np.asarray(I, dtype=float) / self.u_prime(theta)
        if np.any(np.abs(Ip) >= 1.0):
            raise DomainExit("explicit step left (-1, 1)")
        return theta + self.h0.dh(Ip) + self.v.eval(theta), Ip

    def step(self, state: TwistState) -> TwistState:
        t, p = self.step_arrays(state.theta, state.I)
        return TwistState(float(t), float(p))

    def dTheta_dI(self, theta, I):
        """Closed form ``h_0''(I / u') / u'``."""
        up = self.u_prime(theta)
        return self.h0.d2h(np.asarray(I) / up) / up

    def generating_function(self) -> GeneratingFunction:
        return GeneratingFunction.linear_perturbation(self.h0, self.v)


class IntegrableTwistMap:
    """``(theta, I) -> (theta + h_0'(I), I)``."""

    def __init__(self, h0: IntegrableGenerating):
        self.h0 = h0

    def step(self, state: TwistState) -> TwistState:
        return TwistState(state.theta + float(self.h0.dh(state.I)), state.I)


def build_explicit_map(h0: IntegrableGenerating, v: FourierSeries, eps_budget: float, s: float) -> ExplicitPerturbedTwistMap:
    """Certify ``|v|_s <= eps_budget`` (surrogate norm, unit action disc) and orientation."""
    nv = norm_s(v, s)
    if nv > eps_budget:
        raise CertificationError(f"budget exceeded: |v|_s = {nv:.6g} > eps = {eps_budget:.6g} at s = {s}")
    return ExplicitPerturbedTwistMap(h0, v, eps_budget, s)


def jacobian_det(step: Callable[[TwistState], TwistState], state: TwistState, delta: float = 1e-5) -> float:
    """Central-difference determinant of the 2x2 Jacobian of ``step``."""
    try:
        tp = step(TwistState(state.theta + delta, state.I))
        tm = step(TwistState(state.theta - delta, state.I))
        ip = step(TwistState(state.theta, state.I + delta))
        im = step(TwistState(state.theta, state.I - delta))
    except DomainExit as exc:
        raise DomainExit(f"stencil left the domain: {exc}") from exc
    a = (tp.theta - tm.theta) / (2 * delta)
    b = (ip.theta - im.theta) / (2 * delta)
    c = (tp.I - tm.I) / (2 * delta)
    d = (ip.I - im.I) / (2 * delta)
    return a * d - b * c


@dataclass(frozen=True)
class TwistReport:
    fd_min: float
    fd_max: float
    closed_min: float | None
    closed_max: float | None
    sign: int
    passes: bool
    note: str


def twist_check(twist_map, thetas: Sequence[float], Is: Sequence[float], delta: float = 1e-6,
                slack: float = 1e-9) -> TwistReport:
    """``dTheta/dI`` on a grid by central differences (and in closed form when
    the map provides it). Passes when the derivative keeps one sign with margin."""
    vals = []
    for t in thetas:
        for I in Is:
            up = twist_map.step(TwistState(t, I + delta))
            dn = twist_map.step(TwistState(t, I - delta))
            vals.append((up.theta - dn.theta) / (2 * delta))
    vals = np.array(vals)
    cmin = cmax = None
    if hasattr(twist_map, "dTheta_dI"):
        T, P = np.meshgrid(np.asarray(thetas, float), np.asarray(Is, float), indexing="ij")
        cf = twist_map.dTheta_dI(T, P)
        cmin, cmax = float(cf.min()), float(cf.max())
    if vals.min() > slack:
        sign, passes, note = 1, True, "twist condition holds with dTheta/dI > 0"
    elif vals.max() < -slack:
        sign, passes, note = -1, True, "twist holds with reversed sign convention (dTheta/dI < 0)"
    else:
        sign, passes, note = 0, False, "twist condition fails: dTheta/dI changes sign or vanishes"
    return TwistReport(float(vals.min()), float(vals.max()), cmin, cmax, sign, passes, note)


def orbit_rotation(twist_map, state: TwistState, n: int) -> tuple[np.ndarray, RotationEstimate]:
    """Trajectory ``(theta_j, I_j)`` for ``j = 0..n`` and a Richardson-refined
    theta-rotation estimate (as for circle maps)."""
    traj = np.empty((n + 1, 2))
    traj[0] = state.theta, state.I
    s = state
    for j in range(1, n + 1):
        try:
            s = twist_map.step(s)
        except DomainExit as exc:
            raise DomainExit(f"orbit left the domain at step {j}: {exc}", step=j) from exc
        traj[j] = s.theta, s.I
    r_full = (traj[n, 0] - traj[0, 0]) / n
    r_half = (traj[n // 2, 0] - traj[0, 0]) / (n // 2)
    return traj, RotationEstimate(float(2 * r_full - r_half), float(abs(r_full - r_half)), n)


def invariant_level(h0: IntegrableGenerating, rho: float) -> float:
    """The action ``I`` with ``h_0'(I) = rho`` (unique by (b1))."""
    f = lambda I: float(h0.dh(I)) - rho
    lo, hi = -1 + 1e-12, 1 - 1e-12
    if f(lo) * f(hi) > 0:
        raise ConfigError(f"rotation {rho} not realised by any level in (-1, 1)")
    return brentq(f, lo, hi, xtol=1e-15)


def level_scan(h0: IntegrableGenerating, rho: float, levels: Sequence[float], tol: float = 1e-9) -> list[float]:
    """Levels ``I = const`` of the integrable map whose rotation number is ``rho``."""
    return [float(I) for I in levels if abs(float(h0.dh(I)) - rho) <= tol]
