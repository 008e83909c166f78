"""Acceptance criteria, one test per criterion, each recording a PASS/FAIL line."""

import filecmp
import itertools
import math
import time

import mpmath
import numpy as np
import pytest

from brlab.analytic import FourierSeries, solve_cohomological
from brlab.arithmetic.alpha import golden
from brlab.arithmetic.contfrac import GrowthSpec, bruno_sum_partial, cf_expand, construct_alpha
from brlab.arithmetic.psi import FrequencyVector, psi_table
from brlab.circle import CircleMapLift, conjugacy_probe
from brlab.cli import main
from brlab.hamiltonflow import (
    IntegrableHamiltonian,
    PerturbedHamiltonian,
    ReparametrizedFlow,
    direction_deviation,
    integrate_reparametrized,
    integrate,
    rotation_vector,
    self_convergence,
)
from brlab.twist import GeneratingFunction, IntegrableGenerating, TwistState, build_explicit_map, jacobian_det

GAMMA = (5**0.5 - 1) / 2
PHI = (5**0.5 + 1) / 2


def fibonacci(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def brute_psi(omega, Q):
    best = math.inf
    for k in itertools.product(range(-Q, Q + 1), repeat=len(omega)):
        if 0 < sum(map(abs, k)) <= Q:
            best = min(best, abs(sum(a * b for a, b in zip(k, omega))))
    return 1 / best


def test_c1_continued_fraction_exactness(acceptance):
    t0 = time.perf_counter()
    table = cf_expand(golden(), 30)
    det_ok = all(table.p[n] * table.q[n - 1] - table.p[n - 1] * table.q[n] == (-1) ** (n - 1) for n in range(1, 31))
    fib_ok = table.q[30] == fibonacci(31)
    elapsed = time.perf_counter() - t0
    ok = det_ok and fib_ok and elapsed < 1.0
    acceptance("1 continued-fraction exactness", ok,
               f"determinant identity {det_ok}, q_30 = {table.q[30]} = F_31 {fib_ok}, {elapsed:.3f} s")
    assert ok


def test_c2a_golden_bruno_sum(acceptance):
    table = cf_expand(golden(), 10)
    value = bruno_sum_partial(table, 6)
    with mpmath.workdps(60):
        oracle = float(sum(mpmath.log(table.q[n + 1]) / table.q[n] for n in range(7)))
    ok = abs(value - oracle) <= 1e-3 and abs(value - 2.7496) <= 1e-3
    acceptance("2a golden Bruno partial sum N=6", ok, f"{value:.10f} vs big-integer oracle {oracle:.10f}")
    assert ok


@pytest.mark.xfail(strict=True, reason="q_5 of the c = 1 construction has about 2.5e24 digits; "
                   "terms n >= 4 of the partial sums cannot be represented")
def test_c2b_constant_ratio_increments(acceptance):
    table, _ = construct_alpha(GrowthSpec("constant", 1.0), 7)
    rows = table.rows()
    increments = {n: ratio for n, _, ratio, _ in rows if n >= 2}
    wanted = range(2, 7)
    have = [n for n in wanted if n in increments]
    ok = have == list(wanted) and all(abs(increments[n] - 1.0) <= 0.4 for n in wanted)
    shown = ", ".join(f"n={n}: {increments[n]:.4f}" for n in have)
    acceptance("2b constant-ratio increments 1 +- 0.4 for n=2..6", ok,
               f"available {shown}; construction stops at depth {table.depth} ({table.note})")
    assert ok


def test_c3_psi_correctness(acceptance):
    om = FrequencyVector((1.0, GAMMA))
    t = psi_table(om, 50)
    p1_ok = abs(t.psi[0] - 1.6180340) <= 1e-6 and abs(t.psi[0] - brute_psi((1, GAMMA), 1)) <= 1e-6
    p2_ok = abs(t.psi[1] - 2.6180340) <= 1e-6 and abs(t.psi[1] - brute_psi((1, GAMMA), 2)) <= 1e-6
    mono = bool(np.all(np.diff(t.psi) >= 0))
    omega3 = (1.0, 2**0.5, 3**0.5)
    t0 = time.perf_counter()
    t3 = psi_table(FrequencyVector(omega3), 20)
    elapsed = time.perf_counter() - t0
    match3 = abs(t3.psi[-1] / brute_psi(omega3, 20) - 1) < 1e-12
    ok = p1_ok and p2_ok and mono and match3 and elapsed < 5
    acceptance("3 Psi correctness", ok,
               f"Psi(1) = {t.psi[0]:.9f}, Psi(2) = {t.psi[1]:.9f}, monotone to Q=50 {mono}, "
               f"n=3 Q=20 matches brute force {match3} in {elapsed:.3f} s")
    assert ok


def test_c4_amplification_bound(acceptance, liouville):
    table, rat = liouville
    _, amp_l = solve_cohomological(FourierSeries.zeros(1, 64), rat, 64)
    bound = table.q[3] / (2 * np.pi)
    liou_ok = table.q[2] == 4 and amp_l.at(4) > bound
    g_table = cf_expand(golden(), 8)
    _, amp_g = solve_cohomological(FourierSeries.zeros(1, 64), golden(), 64)
    qs = sorted(set(g_table.q[: 9]))
    amps = [amp_g.at(q) for q in qs]
    ratios = [b / a for a, b in zip(amps, amps[1:])]
    gold_ok = max(ratios) <= PHI**2 + 0.1
    ok = liou_ok and gold_ok
    acceptance("4 cohomological amplification bound", ok,
               f"constructed alpha amp(q_2=4) = {amp_l.at(4):.4f} > q_3/2pi = {bound:.4f}; "
               f"golden step ratios max {max(ratios):.4f} <= {PHI**2 + 0.1:.4f}")
    assert ok


def test_c5_explicit_map_invariants(acceptance):
    h0 = IntegrableGenerating.quadratic(GAMMA)
    v = FourierSeries.cosine(1e-2, 1)
    fmap = build_explicit_map(h0, v, 1.0, 0.1)
    th = np.arange(256) / 256
    Theta, Ip = fmap.step_arrays(th, np.zeros_like(th))
    inv = float(np.abs(Ip).max())
    restr = float(np.abs(Theta - CircleMapLift(GAMMA, v)(th)).max())
    rng = np.random.default_rng(0)
    states = [TwistState(a, b) for a, b in zip(rng.random(50), rng.uniform(-0.5, 0.5, 50))]
    det = max(abs(jacobian_det(fmap.step, s) - 1) for s in states)
    gen = GeneratingFunction.linear_perturbation(h0, v)
    agree = max(max(abs(fmap.step(s).theta - gen.step(s).theta), abs(fmap.step(s).I - gen.step(s).I))
                for s in states)
    ok = inv <= 1e-15 and restr <= 1e-14 and det <= 1e-8 and agree <= 1e-10
    acceptance("5 explicit-map invariants", ok,
               f"|I'| {inv:.1e}, restriction {restr:.1e}, |det - 1| {det:.1e}, explicit/implicit {agree:.1e}")
    assert ok


def test_c6_probe_dichotomy(acceptance, liouville):
    _, rat = liouville
    v = FourierSeries.cosine(1e-3, 1)
    t0 = time.perf_counter()
    gold = conjugacy_probe(CircleMapLift(GAMMA, v), K=64)
    liou = conjugacy_probe(CircleMapLift(rat, v), K=64)
    elapsed = time.perf_counter() - t0
    ok = (gold.verdict == "converged" and gold.residual < 1e-10
          and liou.verdict in ("stalled", "diverged")
          and liou.amplification_max > 10 * gold.amplification_max and elapsed < 30)
    acceptance("6 conjugacy probe dichotomy", ok,
               f"golden {gold.verdict} residual {gold.residual:.2e} amp {gold.amplification_max:.3g}; "
               f"Liouville {liou.verdict} amp {liou.amplification_max:.3g}; {elapsed:.2f} s")
    assert ok


def test_c7_hamiltonian_invariants(acceptance):
    H0 = IntegrableHamiltonian.quadratic([1.0, GAMMA])
    V = [FourierSeries.from_modes({(1, 0): 0.01, (0, 1): 0.005j}, n=2, K=1), FourierSeries.cosine(0.01, (1, 1), 1)]
    H1 = PerturbedHamiltonian(H0, V, s=0.1, eps=0.1)
    zero = integrate(H1, [0.1, 0.2], [0.0, 0.0], 1e3, 1e-3)
    integ = integrate(H0, [0.0, 0.0], [0.3, -0.1], 1e3, 1e-3)
    Vs = [FourierSeries.from_modes({(1, 0): 0.1, (0, 1): 0.05j}, n=2, K=1), FourierSeries.cosine(0.1, (1, 1), 1)]
    factor = self_convergence(PerturbedHamiltonian(H0, Vs), [0.1, 0.2], [0.3, -0.2], 10.0, 0.01)
    ok = zero.sup_I <= 1e-10 and integ.drift < 1e-10 and abs(factor - 16) <= 4
    acceptance("7 Hamiltonian invariants", ok,
               f"sup|I| {zero.sup_I:.1e}, integrable drift {integ.drift:.1e}, self-convergence {factor:.2f}")
    assert ok


def test_c8_reparametrized_rotation_scaling(acceptance):
    eps = 0.1
    omega = np.array([1.0, GAMMA])
    flow = ReparametrizedFlow(omega, FourierSeries.cosine(eps, (1, 0), 1))
    traj = integrate_reparametrized(flow, [0.0, 0.0], 1e4, 1e-2)
    vec, _ = rotation_vector(traj)
    err = float(np.abs(vec - np.sqrt(1 - eps**2) * omega).max())
    dev = direction_deviation(traj.theta, omega)
    ok = err <= 1e-4 and dev <= 1e-10
    acceptance("8 reparametrized-flow rotation scaling", ok, f"|rho - sqrt(1-eps^2) omega| {err:.2e}, direction deviation {dev:.1e}")
    assert ok


def test_c9_determinism(acceptance, tmp_path):
    cfg = tmp_path / "t1.ini"
    cfg.write_text("[frequency]\nalpha = golden\n[perturbation]\namplitude = 1e-3\n[run]\nN = 1024\norbits = 3\n")
    a, b = tmp_path / "a", tmp_path / "b"
    codes = [main(["theorem1", "--config", str(cfg), "--out", str(d)]) for d in (a, b)]
    names = sorted(p.name for p in a.iterdir())
    same = names == sorted(p.name for p in b.iterdir())
    _, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    ok = codes == [0, 0] and same and not mismatch and not errors and len(names) > 3
    acceptance("9 determinism of theorem1", ok, f"{len(names)} files, mismatches {mismatch + errors}")
    assert ok
