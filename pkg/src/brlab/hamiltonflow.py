"""Hamiltonians ``H_1 = H_0(I) + V(theta) . I`` on T^n x (-1, 1)^n, their flows,
and reparametrised linear flows ``dtheta/dt = (1 + phi(theta)) omega``.

The zero section ``I = 0`` is invariant: the I-component of the field is
linear in I. On it the angle dynamics is ``dtheta/dt = omega + V(theta)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate as sp_integrate

from . import _kernels
from .analytic import FourierSeries, norm_s
from .arithmetic.psi import half_lattice
from .circle import RotationEstimate
from .errors import CertificationError, ConfigError, DomainExit, IntegrationError

SCHEMES = ("rk4", "adaptive")
DIRECTION_TOL = 1e-10
WEYL_MODES = 8
WEYL_FACTOR = 5.0


class IntegrableHamiltonian:
    """Polynomial ``H_0(I) = sum_t coef_t prod_j I_j^{exps[t, j]}``.

    ``omega = grad H_0(0)``. Positive definiteness of the Hessian (B1) is not
    enforced here; call :meth:`certify` (indefinite examples are legitimate
    inputs for :func:`tonelli_check`).
    """

    def __init__(self, exps: np.ndarray, coef: Sequence[float]):
        self.exps = np.atleast_2d(np.asarray(exps, dtype=np.int64))
        self.coef = np.asarray(coef, dtype=float)
        if self.exps.shape[0] != self.coef.shape[0]:
            raise ConfigError("one coefficient per monomial required")
        if np.any(self.exps < 0):
            raise ConfigError("negative exponents are not polynomial")
        self.n = self.exps.shape[1]
        self.omega = self.grad(np.zeros(self.n))

    @classmethod
    def quadratic(cls, omega: Sequence[float], A: np.ndarray | None = None) -> "IntegrableHamiltonian":
        """``H_0(I) = omega . I + I^T A I / 2`` (``A`` defaults to the identity)."""
        omega = np.asarray(omega, dtype=float)
        n = len(omega)
        A = np.eye(n) if A is None else np.asarray(A, dtype=float)
        if A.shape != (n, n) or not np.allclose(A, A.T):
            raise ConfigError("A must be a symmetric n x n matrix")
        exps, coef = [], []
        for j in range(n):
            e = np.zeros(n, dtype=int)
            e[j] = 1
            exps.append(e)
            coef.append(omega[j])
        for i in range(n):
            for j in range(i, n):
                if A[i, j] == 0:
                    continue
                e = np.zeros(n, dtype=int)
                e[i] += 1
                e[j] += 1
                exps.append(e)
                coef.append(A[i, j] / 2 if i == j else A[i, j])
        return cls(np.array(exps), coef)

    def value(self, I) -> float:
        return float(_kernels._poly_value(np.asarray(I, dtype=float), self.exps, self.coef))

    def grad(self, I) -> np.ndarray:
        g = np.empty(self.n)
        _kernels._poly_grad(np.asarray(I, dtype=float), self.exps, self.coef, g)
        return g

    def hessian(self, I) -> np.ndarray:
        I = np.asarray(I, dtype=float)
        out = np.zeros((self.n, self.n))
        for e, c in zip(self.exps, self.coef):
            for i in range(self.n):
                for j in range(self.n):
                    f = e.copy()
                    mult = f[i]
                    f[i] -= 1
                    mult *= f[j]
                    f[j] -= 1
                    if mult > 0:
                        out[i, j] += c * mult * np.prod(I ** f)
        return out

    def certify(self, points_per_axis: int = 5, slack: float = 1e-9) -> float:
        """(B1): all leading minors of the Hessian exceed ``slack`` on a grid.
        Returns the smallest minor seen."""
        worst = math.inf
        for I in _action_grid(self.n, points_per_axis):
            Hs = self.hessian(I)
            for m in range(1, self.n + 1):
                d = float(np.linalg.det(Hs[:m, :m]))
                if d <= slack:
                    raise CertificationError(f"(B1) fails: leading minor {m} = {d:.6g} at I = {I.tolist()}")
                worst = min(worst, d)
        return worst


def _action_grid(n: int, points: int) -> list[np.ndarray]:
    axis = np.linspace(-1, 1, points + 2)[1:-1]
    return [np.array(p) for p in itertools.product(axis, repeat=n)]


class PerturbedHamiltonian:
    """``H_1(theta, I) = H_0(I) + sum_i V_i(theta) I_i`` with the budget
    ``sum_i |V_i|_s <= eps`` checked at construction."""

    def __init__(self, H0: IntegrableHamiltonian, V: Sequence[FourierSeries] | None = None,
                 s: float = 0.0, eps: float | None = None):
        n = H0.n
        V = [FourierSeries.zeros(n, 0) for _ in range(n)] if V is None else list(V)
        if len(V) != n or any(f.n != n or not f.real for f in V):
            raise ConfigError(f"V must be {n} real series on T^{n}")
        self.H0 = H0
        self.V = V
        self.s = s
        self.v_norm = float(sum(norm_s(f, s) for f in V))
        self.eps = self.v_norm if eps is None else eps
        if self.v_norm > self.eps:
            raise CertificationError(f"budget exceeded: sum |V_i|_s = {self.v_norm:.6g} > eps = {self.eps:.6g}")
        modes = sorted({k for f in V for k, _ in f.modes()})
        self._ks = np.array(modes, dtype=np.int64).reshape(-1, n)
        self._cs = np.array([[f[k] for k in modes] for f in V], dtype=complex).reshape(n, len(modes))

    @property
    def n(self) -> int:
        return self.H0.n

    @property
    def omega(self) -> np.ndarray:
        return self.H0.omega

    def energy(self, theta, I) -> float:
        return float(_kernels.hamiltonian_energy(np.asarray(theta, float), np.asarray(I, float),
                                                 self.H0.exps, self.H0.coef, self._ks, self._cs))

    def V_at(self, theta) -> np.ndarray:
        return np.array([f.eval(np.asarray(theta, float)) for f in self.V], dtype=float)


def as_perturbed(H) -> PerturbedHamiltonian:
    if isinstance(H, PerturbedHamiltonian):
        return H
    if isinstance(H, IntegrableHamiltonian):
        return PerturbedHamiltonian(H)
    raise ConfigError(f"not a Hamiltonian: {type(H).__name__}")


def vector_field(H, theta, I) -> tuple[np.ndarray, np.ndarray]:
    """``(grad H_0(I) + V(theta), -(D_theta V)^T I)``."""
    H = as_perturbed(H)
    theta = np.asarray(theta, dtype=float)
    I = np.asarray(I, dtype=float)
    if np.any(np.abs(I) >= 1):
        raise DomainExit(f"I = {I.tolist()} outside (-1, 1)^n")
    dth = np.empty(H.n)
    dI = np.empty(H.n)
    _kernels.hamiltonian_field(theta, I, H.H0.exps, H.H0.coef, H._ks, H._cs, dth, dI)
    return dth, dI


@dataclass
class FlowTrajectory:
    t: np.ndarray
    theta: np.ndarray
    I: np.ndarray | None = None
    H: np.ndarray | None = None
    scheme: str = "rk4"
    dt: float = 0.0
    exit_time: float | None = None
    sup_I: float = 0.0
    drift_bound: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def drift(self) -> float | None:
        if self.H is None:
            return None
        return float(abs(self.H[-1] - self.H[0]))

    @property
    def drift_ok(self) -> bool | None:
        if self.H is None or self.drift_bound is None:
            return None
        return self.drift <= self.drift_bound

    def rows(self) -> list[tuple]:
        """``t, theta_1..theta_n[, I_1..I_n, H]`` per sample."""
        out = []
        for j in range(len(self.t)):
            row = [float(self.t[j]), *map(float, self.theta[j])]
            if self.I is not None:
                row += [*map(float, self.I[j]), float(self.H[j])]
            out.append(tuple(row))
        return out

    def header(self) -> list[str]:
        n = self.theta.shape[1]
        h = ["t"] + [f"theta_{i + 1}" for i in range(n)]
        if self.I is not None:
            h += [f"I_{i + 1}" for i in range(n)] + ["H"]
        return h


def drift_bound(scheme: str, dt: float, T: float, scale: float = 1.0, rtol: float = 1e-11) -> float:
    """Published energy-drift contract: truncation part plus accumulated round-off.

    rk4: ``10 T dt^4 + 4 eps n_steps``; adaptive: ``10 T rtol + 4 eps n_steps``
    (with ``n_steps`` estimated from ``dt`` as the typical step), all times
    ``max(1, |H|)``.
    """
    eps = np.finfo(float).eps
    n_steps = T / dt
    trunc = 10 * T * dt**4 if scheme == "rk4" else 10 * T * rtol
    return float((trunc + 4 * eps * n_steps) * max(1.0, scale))


def _sampling(n_steps: int, samples: int) -> int:
    """Largest stride dividing ``n_steps`` with at least ``samples`` samples
    and an even sample count (so the midpoint is sampled)."""
    target = max(1, n_steps // max(1, samples))
    for every in range(target, 0, -1):
        if n_steps % every == 0 and (n_steps // every) % 2 == 0:
            return every
    return 1


def _steps(T: float, dt: float) -> int:
    if dt <= 0 or T <= 0:
        raise ConfigError("T and dt must be positive")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * T:
        raise ConfigError(f"T = {T} is not a whole number of steps dt = {dt}")
    return n


def integrate(H, theta0, I0, T: float, dt: float, scheme: str = "rk4", samples: int = 2000,
              rtol: float = 1e-11, atol: float = 1e-13) -> FlowTrajectory:
    """Flow of ``H`` from ``(theta0, I0)`` up to time ``T``.

    ``rk4`` is fixed-step classical 4th order; ``adaptive`` is the DOP853
    embedded pair with ``dt`` as the maximal step. A domain exit stops the run
    and is recorded in ``exit_time`` (the trajectory up to the exit is kept).
    """
    H = as_perturbed(H)
    th0 = np.asarray(theta0, dtype=float).reshape(H.n)
    i0 = np.asarray(I0, dtype=float).reshape(H.n)
    if np.any(np.abs(i0) >= 1):
        raise DomainExit("initial action outside (-1, 1)^n", time=0.0)
    if scheme not in SCHEMES:
        raise ConfigError(f"scheme must be one of {SCHEMES}")
    n_steps = _steps(T, dt)
    every = _sampling(n_steps, samples)
    scale = abs(H.energy(th0, i0))
    if scheme == "rk4":
        th, I, E, sup_I, exit_step = _kernels.rk4_hamiltonian(
            th0, i0, float(dt), n_steps, every, H.H0.exps, H.H0.coef, H._ks, H._cs)
        t = np.arange(len(E)) * every * dt
        exit_time = None if exit_step < 0 else exit_step * dt
        return FlowTrajectory(t, th, I, E, "rk4", dt, exit_time, float(sup_I),
                              drift_bound("rk4", dt, T, scale), {"n_steps": n_steps, "every": every})

    n = H.n

    def rhs(_t, y):
        dth = np.empty(n)
        dI = np.empty(n)
        _kernels.hamiltonian_field(y[:n], y[n:], H.H0.exps, H.H0.coef, H._ks, H._cs, dth, dI)
        return np.concatenate([dth, dI])

    def leave(_t, y):
        return 1.0 - np.abs(y[n:]).max()

    leave.terminal = True
    t_eval = np.arange(n_steps // every + 1) * every * dt
    t_eval[-1] = T
    sol = sp_integrate.solve_ivp(rhs, (0.0, T), np.concatenate([th0, i0]), method="DOP853",
                                 t_eval=t_eval, rtol=rtol, atol=atol, max_step=dt, events=leave)
    if sol.status == -1:
        raise IntegrationError(f"adaptive integration failed: {sol.message}")
    exit_time = float(sol.t_events[0][0]) if sol.status == 1 else None
    y = sol.y.T
    E = np.array([H.energy(r[:n], r[n:]) for r in y])
    return FlowTrajectory(sol.t, y[:, :n].copy(), y[:, n:].copy(), E, "adaptive", dt, exit_time,
                          float(np.abs(y[:, n:]).max()), drift_bound("adaptive", dt, T, scale, rtol),
                          {"nfev": int(sol.nfev), "rtol": rtol})


def self_convergence(H, theta0, I0, T: float, dt: float) -> float:
    """``|x_dt - x_ref| / |x_{dt/2} - x_ref|`` with ``x_ref`` from a ``dt/8`` run
    (final states); about 16 for a 4th-order scheme."""
    ends = []
    for h in (dt, dt / 2, dt / 8):
        tr = integrate(H, theta0, I0, T, h, "rk4", samples=2)
        ends.append(np.concatenate([tr.theta[-1], tr.I[-1]]))
    e1 = np.abs(ends[0] - ends[2]).max()
    e2 = np.abs(ends[1] - ends[2]).max()
    return float(e1 / e2)


class ReparametrizedFlow:
    """``U(theta) = (1 + phi(theta)) omega`` with ``phi`` real and mean free.

    Positivity of the time change is certified on a grid: the grid minimum of
    ``1 + phi`` minus half a grid cell times ``sum |c_k| 2 pi |k|_1``.
    """

    def __init__(self, omega: Sequence[float], phi: FourierSeries, mean_tol: float = 1e-14):
        self.omega = np.asarray(omega, dtype=float)
        n = len(self.omega)
        if phi.n != n or not phi.real:
            raise ConfigError(f"phi must be a real series on T^{n}")
        if abs(phi.mean) > mean_tol:
            raise ConfigError(f"phi must have zero mean, got {phi.mean.real:.3g}")
        self.phi = phi
        L = max(8, int(round(2 ** (12 / n))))
        axes = [np.arange(L) / L] * n
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        gmin = float((1 + phi.eval(grid)).min())
        self.min_speed = gmin - 0.5 / L * phi.derivative_bound(1)
        if self.min_speed <= 0:
            raise CertificationError(f"time change not certified positive: min(1 + phi) >= {self.min_speed:.6g}")
        ks, cs = phi.sparse()
        self._ks = ks
        self._cs = cs

    @property
    def n(self) -> int:
        return len(self.omega)

    def field(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return (1 + self.phi.eval(theta))[..., None] * self.omega


def direction_deviation(theta: np.ndarray, omega: np.ndarray) -> float:
    """Largest ``|d - (d.w/|w|^2) w| / max(1, |d|)`` over lifted displacements ``d``."""
    d = theta - theta[0]
    w = np.asarray(omega, dtype=float)
    proj = (d @ w / (w @ w))[:, None] * w
    perp = np.linalg.norm(d - proj, axis=1)
    return float((perp / np.maximum(1.0, np.linalg.norm(d, axis=1))).max())


def integrate_reparametrized(flow: ReparametrizedFlow, theta0, T: float, dt: float = 1e-2, samples: int = 2000) -> FlowTrajectory:
    """Integrate ``dtheta/dt = (1 + phi(theta)) omega``; asserts that the lifted
    displacement stays parallel to ``omega`` (relative tolerance 1e-10)."""
    th0 = np.asarray(theta0, dtype=float).reshape(flow.n)
    n_steps = _steps(T, dt)
    every = _sampling(n_steps, samples)
    th = _kernels.rk4_reparametrized(th0, flow.omega, float(dt), n_steps, every, flow._ks, flow._cs)
    t = np.arange(len(th)) * every * dt
    dev = direction_deviation(th, flow.omega)
    if dev > DIRECTION_TOL:
        raise IntegrationError(f"displacement left the line theta0 + R omega (deviation {dev:.3g})")
    return FlowTrajectory(t, th, scheme="rk4", dt=dt, meta={"direction_deviation": dev, "every": every})


def rotation_vector(traj: FlowTrajectory) -> tuple[np.ndarray, RotationEstimate]:
    """``(theta(T) - theta(0)) / T`` with one Richardson step between ``T`` and
    ``T/2``; the error estimate is the sup-norm of their difference."""
    t = traj.t
    T = float(t[-1] - t[0])
    if traj.dt > 0 and T < 10 * traj.dt:
        raise ConfigError(f"trajectory too short: T = {T} < 10 dt")
    if traj.I is not None and np.abs(traj.I - traj.I[0]).max() > 1e-8:
        raise ConfigError("rotation vector needs a trajectory on a torus (I constant)")
    mid = int(np.argmin(np.abs(t - (t[0] + T / 2))))
    r_full = (traj.theta[-1] - traj.theta[0]) / T
    r_half = (traj.theta[mid] - traj.theta[0]) / (t[mid] - t[0])
    err = float(np.abs(r_full - r_half).max())
    vec = 2 * r_full - r_half
    return vec, RotationEstimate(float(np.linalg.norm(vec)), err, len(t) - 1)


def harmonic_factor(phi: FourierSeries) -> float:
    """``c = 1 / integral (1 + phi)^{-1}``: the time-average speed of the
    reparametrised flow relative to ``omega``.

    Adaptive quadrature when ``phi`` depends on one angle, otherwise a
    periodic trapezoid rule (spectrally accurate for analytic ``phi``).
    """
    ks, _ = phi.sparse()
    active = np.flatnonzero(np.abs(ks).sum(axis=0)) if len(ks) else np.array([], dtype=int)
    if len(active) == 0:
        return 1.0
    if len(active) == 1:
        axis = int(active[0])

        def f(x):
            p = np.zeros(phi.n)
            p[axis] = x
            return 1.0 / (1.0 + float(phi.eval(p)))

        val, _ = sp_integrate.quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
        return 1.0 / val
    if phi.n > 3:
        raise ConfigError("harmonic factor by grid is limited to n <= 3")
    L = 256 if phi.n == 2 else 64
    axes = [np.arange(L) / L] * phi.n
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, phi.n)
    return float(1.0 / np.mean(1.0 / (1.0 + phi.eval(grid))))


@dataclass(frozen=True)
class TonelliReport:
    min_eigenvalue: float
    argmin: tuple
    a1_passes: bool
    a2: str
    note: str

    def to_dict(self) -> dict:
        return {"min_eigenvalue": self.min_eigenvalue, "argmin": list(self.argmin),
                "a1_passes": self.a1_passes, "a2": self.a2, "note": self.note}


def tonelli_check(H, points_per_axis: int = 5, theta_points: int = 3, slack: float = 1e-9,
                  fd_step: float = 1e-4) -> TonelliReport:
    """Smallest eigenvalue of the action Hessian over a grid in T^n x B.

    For ``H_0`` the Hessian is exact; for ``H_1`` it is taken by central
    differences of the energy, which also checks that ``V . I`` adds nothing.
    (A2) superlinearity concerns all of R^n and cannot be checked here.
    """
    n = H.n
    actions = _action_grid(n, points_per_axis)
    worst, where = math.inf, ()
    if isinstance(H, IntegrableHamiltonian):
        for I in actions:
            e = float(np.linalg.eigvalsh(H.hessian(I)).min())
            if e < worst:
                worst, where = e, (tuple(I.tolist()),)
    else:
        angles = [np.array(p) for p in itertools.product(np.arange(theta_points) / theta_points, repeat=n)]
        h = fd_step
        for th in angles:
            for I in actions:
                Hs = np.empty((n, n))
                for i in range(n):
                    for j in range(n):
                        ei = np.eye(n)[i] * h
                        ej = np.eye(n)[j] * h
                        Hs[i, j] = (H.energy(th, I + ei + ej) - H.energy(th, I + ei - ej)
                                    - H.energy(th, I - ei + ej) + H.energy(th, I - ei - ej)) / (4 * h * h)
                e = float(np.linalg.eigvalsh(0.5 * (Hs + Hs.T)).min())
                if e < worst:
                    worst, where = e, (tuple(th.tolist()), tuple(I.tolist()))
    ok = worst > slack
    note = "(A1) holds on the grid" if ok else f"(A1) fails at grid point {where}"
    return TonelliReport(worst, where, ok, "not checkable",
                         note + "; (A2) superlinearity is global and outside the local model")


@dataclass(frozen=True)
class WeylProxy:
    modes: list
    averages: list
    threshold: float
    passes: bool
    heuristic: bool = True

    def to_dict(self) -> dict:
        return {"modes": [list(k) for k in self.modes], "averages": self.averages,
                "threshold": self.threshold, "passes": self.passes, "heuristic": self.heuristic}


def weyl_proxy(theta: np.ndarray, n_modes: int = WEYL_MODES, factor: float = WEYL_FACTOR) -> WeylProxy:
    """Equidistribution proxy: ``|N^-1 sum_j exp(2 pi i k . theta_j)| <= factor N^-1/2``
    for the ``n_modes`` lowest modes (l1 norm, then lexicographic). Heuristic."""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if theta.shape[0] == 1 and theta.shape[1] > 1 and theta.ndim == 2:
        theta = theta.T
    N, n = theta.shape
    Q = 1
    while len(half_lattice(n, Q, "l1")) < n_modes:
        Q += 1
    ks = sorted(map(tuple, half_lattice(n, Q, "l1").tolist()), key=lambda k: (sum(map(abs, k)), k))[:n_modes]
    avgs = [float(abs(np.exp(2j * np.pi * (theta @ np.array(k))).mean())) for k in ks]
    thr = factor / math.sqrt(N)
    return WeylProxy(ks, avgs, thr, all(a <= thr for a in avgs))
