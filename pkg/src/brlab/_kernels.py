"""Compiled inner loops. Trigonometric polynomials are passed in sparse form:
integer modes ``ks`` (m x n) with complex coefficients ``cs`` (m,)."""

from __future__ import annotations

import numpy as np
from numba import njit

TWO_PI = 2.0 * np.pi


@njit(cache=True)
def circle_orbit(theta0, n_steps, alpha, ks, cos_c, sin_c, c0):
    """Iterate ``u(x) = x + alpha + c0 + sum cos_c cos(2 pi k x) + sin_c sin(2 pi k x)``."""
    out = np.empty(n_steps + 1)
    x = theta0
    out[0] = x
    for j in range(n_steps):
        v = c0
        for i in range(ks.shape[0]):
            a = TWO_PI * ks[i] * x
            v += cos_c[i] * np.cos(a) + sin_c[i] * np.sin(a)
        x = x + alpha + v
        out[j + 1] = x
    return out


@njit(cache=True)
def _poly_grad(I, exps, coef, grad):
    n = I.shape[0]
    for j in range(n):
        grad[j] = 0.0
    for t in range(exps.shape[0]):
        for j in range(n):
            e = exps[t, j]
            if e == 0:
                continue
            term = coef[t] * e
            for m in range(n):
                p = exps[t, m] - (1 if m == j else 0)
                if p > 0:
                    term *= I[m] ** p
            grad[j] += term


@njit(cache=True)
def _poly_value(I, exps, coef):
    s = 0.0
    for t in range(exps.shape[0]):
        term = coef[t]
        for m in range(I.shape[0]):
            if exps[t, m] > 0:
                term *= I[m] ** exps[t, m]
        s += term
    return s


@njit(cache=True)
def hamiltonian_field(theta, I, exps, coef, ks, cs, dtheta, dI):
    """Field of ``H(theta, I) = P(I) + sum_i V_i(theta) I_i``.

    ``cs`` has shape (n, m): row i holds the coefficients of ``V_i`` on the
    shared mode list ``ks``.
    """
    n = theta.shape[0]
    _poly_grad(I, exps, coef, dtheta)
    for j in range(n):
        dI[j] = 0.0
    for q in range(ks.shape[0]):
        ph = 0.0
        for j in range(n):
            ph += ks[q, j] * theta[j]
        ph *= TWO_PI
        c = np.cos(ph)
        s = np.sin(ph)
        for i in range(n):
            re = cs[i, q].real
            im = cs[i, q].imag
            # Re(c_q e^{i ph}) and d/dtheta_j of it
            val = re * c - im * s
            dval = -(re * s + im * c) * TWO_PI
            dtheta[i] += val
            if I[i] != 0.0:
                for j in range(n):
                    dI[j] -= dval * ks[q, j] * I[i]


@njit(cache=True)
def hamiltonian_energy(theta, I, exps, coef, ks, cs):
    e = _poly_value(I, exps, coef)
    n = theta.shape[0]
    for q in range(ks.shape[0]):
        ph = 0.0
        for j in range(n):
            ph += ks[q, j] * theta[j]
        ph *= TWO_PI
        c = np.cos(ph)
        s = np.sin(ph)
        for i in range(n):
            e += (cs[i, q].real * c - cs[i, q].imag * s) * I[i]
    return e


@njit(cache=True)
def rk4_hamiltonian(theta0, I0, dt, n_steps, every, exps, coef, ks, cs):
    """Classical RK4; returns samples every ``every`` steps and the exit step
    (``-1`` if the orbit stayed inside ``|I_j| < 1``)."""
    n = theta0.shape[0]
    n_samples = n_steps // every + 1
    th_out = np.empty((n_samples, n))
    I_out = np.empty((n_samples, n))
    H_out = np.empty(n_samples)
    sup_I = 0.0
    th = theta0.copy()
    I = I0.copy()
    k1t = np.empty(n); k1i = np.empty(n)
    k2t = np.empty(n); k2i = np.empty(n)
    k3t = np.empty(n); k3i = np.empty(n)
    k4t = np.empty(n); k4i = np.empty(n)
    tt = np.empty(n); ti = np.empty(n)
    th_out[0] = th
    I_out[0] = I
    H_out[0] = hamiltonian_energy(th, I, exps, coef, ks, cs)
    exit_step = -1
    s = 1
    for step in range(1, n_steps + 1):
        hamiltonian_field(th, I, exps, coef, ks, cs, k1t, k1i)
        for j in range(n):
            tt[j] = th[j] + 0.5 * dt * k1t[j]
            ti[j] = I[j] + 0.5 * dt * k1i[j]
        hamiltonian_field(tt, ti, exps, coef, ks, cs, k2t, k2i)
        for j in range(n):
            tt[j] = th[j] + 0.5 * dt * k2t[j]
            ti[j] = I[j] + 0.5 * dt * k2i[j]
        hamiltonian_field(tt, ti, exps, coef, ks, cs, k3t, k3i)
        for j in range(n):
            tt[j] = th[j] + dt * k3t[j]
            ti[j] = I[j] + dt * k3i[j]
        hamiltonian_field(tt, ti, exps, coef, ks, cs, k4t, k4i)
        for j in range(n):
            th[j] += dt / 6.0 * (k1t[j] + 2.0 * k2t[j] + 2.0 * k3t[j] + k4t[j])
            I[j] += dt / 6.0 * (k1i[j] + 2.0 * k2i[j] + 2.0 * k3i[j] + k4i[j])
        out = False
        for j in range(n):
            a = abs(I[j])
            if a > sup_I:
                sup_I = a
            if a >= 1.0:
                out = True
        if out:
            exit_step = step
            break
        if step % every == 0:
            th_out[s] = th
            I_out[s] = I
            H_out[s] = hamiltonian_energy(th, I, exps, coef, ks, cs)
            s += 1
    return th_out[:s], I_out[:s], H_out[:s], sup_I, exit_step


@njit(cache=True)
def rk4_reparametrized(theta0, omega, dt, n_steps, every, ks, cs):
    """RK4 for ``dtheta/dt = (1 + phi(theta)) omega`` with real ``phi`` given
    by sparse modes ``ks``/``cs``."""
    n = theta0.shape[0]
    n_samples = n_steps // every + 1
    out = np.empty((n_samples, n))
    th = theta0.copy()
    tmp = np.empty(n)
    out[0] = th
    s = 1
    for step in range(1, n_steps + 1):
        f1 = _speed(th, ks, cs)
        for j in range(n):
            tmp[j] = th[j] + 0.5 * dt * f1 * omega[j]
        f2 = _speed(tmp, ks, cs)
        for j in range(n):
            tmp[j] = th[j] + 0.5 * dt * f2 * omega[j]
        f3 = _speed(tmp, ks, cs)
        for j in range(n):
            tmp[j] = th[j] + dt * f3 * omega[j]
        f4 = _speed(tmp, ks, cs)
        for j in range(n):
            th[j] += dt / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4) * omega[j]
        if step % every == 0:
            out[s] = th
            s += 1
    return out[:s]


@njit(cache=True)
def _speed(theta, ks, cs):
    v = 1.0
    for q in range(ks.shape[0]):
        ph = 0.0
        for j in range(theta.shape[0]):
            ph += ks[q, j] * theta[j]
        ph *= TWO_PI
        v += cs[q].real * np.cos(ph) - cs[q].imag * np.sin(ph)
    return v
