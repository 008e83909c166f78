from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brlab.analytic import (
    FourierSeries,
    RealnessError,
    analyticity_radius,
    cohomological_residual,
    divisors,
    norm_s,
    solve_cohomological,
)
from brlab.arithmetic.alpha import Rational
from brlab.errors import NumericError, ResonanceError


def test_cosine_coefficients_and_values():
    f = FourierSeries.cosine(0.3, 2, K=4)
    assert f[2] == pytest.approx(0.15) and f[-2] == pytest.approx(0.15)
    th = np.linspace(0, 1, 17)
    assert np.allclose(f(th), 0.3 * np.cos(4 * np.pi * th), atol=1e-15)


def test_from_samples_round_trip():
    rng = np.random.default_rng(1)
    modes = {k: complex(*rng.normal(size=2)) for k in range(1, 6)}
    f = FourierSeries.from_modes(modes, K=5)
    L = 32
    g = FourierSeries.from_samples(f(np.arange(L) / L), 5)
    assert np.allclose(f.coeffs, g.coeffs, atol=1e-14)


def test_two_dimensional_eval():
    f = FourierSeries.cosine(1.0, (1, 2), K=2)
    pts = np.array([[0.1, 0.3], [0.7, 0.2]])
    assert np.allclose(f(pts), np.cos(2 * np.pi * (pts[:, 0] + 2 * pts[:, 1])))


def test_realness_is_checked():
    with pytest.raises(RealnessError):
        FourierSeries.from_modes({1: 1.0, -1: 2.0})


def test_norm_closed_form():
    f = FourierSeries.cosine(0.2, 3, K=3)
    assert norm_s(f, 0.25) == pytest.approx(0.2 * np.exp(2 * np.pi * 0.25 * 3))


def test_derivative_matches_finite_differences():
    f = FourierSeries.from_modes({1: 0.3 + 0.1j, 3: -0.05j})
    th = np.linspace(0, 1, 11)
    h = 1e-6
    fd = (f(th + h) - f(th - h)) / (2 * h)
    assert np.allclose(f.derivative()(th), fd, atol=1e-8)


def test_serialisation_round_trip():
    f = FourierSeries.from_modes({(1, 0): 0.2, (1, -1): 0.1j}, K=2)
    assert np.array_equal(FourierSeries.from_dict(f.to_dict()).coeffs, f.coeffs)
    rows = f.to_rows()
    assert np.array_equal(FourierSeries.from_rows(rows, n=2, K=2).coeffs, f.coeffs)


def test_cohomological_cosine_golden(gamma):
    g = FourierSeries.cosine(1.0, 1, K=8)
    phi, table = solve_cohomological(g, gamma, 8)
    expected = 0.5 / (np.exp(2j * np.pi * gamma) - 1)
    assert phi[1] == pytest.approx(expected, abs=1e-15)
    assert abs(phi[1]) == pytest.approx(0.26823, abs=1e-5)
    assert cohomological_residual(phi, g, gamma) < 1e-14
    assert table.at(1) == pytest.approx(1 / abs(2 * np.sin(np.pi * gamma)))


def test_cohomological_rational_half():
    g = FourierSeries.cosine(1.0, 1, K=2)
    phi, table = solve_cohomological(g, Fraction(1, 2), 2)
    assert abs(phi[1]) == pytest.approx(0.25)
    assert (2,) in table.resonant
    with pytest.raises(ResonanceError):
        solve_cohomological(FourierSeries.cosine(1.0, 2, K=2), Fraction(1, 2), 2)


def test_cohomological_needs_zero_mean(gamma):
    g = FourierSeries.from_modes({0: 0.1, 1: 0.5})
    with pytest.raises(NumericError):
        solve_cohomological(g, gamma)


def test_exact_divisor_for_huge_rational(liouville):
    _, rat = liouville
    phi, table = solve_cohomological(FourierSeries.zeros(1, 64), rat, 64)
    # |e^{2 pi i q_2 alpha} - 1| is governed by ||q_2 alpha|| ~ 1 / q_3
    assert table.at(4) > 57 / (2 * np.pi)
    assert table.max() > 1e23


def test_continuous_kind(gamma):
    g = FourierSeries.cosine(1.0, (1, 1), K=2)
    omega = (1.0, gamma)
    phi, _ = solve_cohomological(g, omega, 2, kind="continuous")
    assert cohomological_residual(phi, g, omega, kind="continuous") < 1e-13
    d = divisors(omega, np.array([[1, 1]]), "continuous")
    assert d[0] == pytest.approx(2j * np.pi * (1 + gamma))


def test_radius_fit_exact_decay():
    f = FourierSeries.from_modes({k: np.exp(-2 * np.pi * 0.3 * k) for k in range(1, 12)})
    fit = analyticity_radius(f)
    assert fit.s_est == pytest.approx(0.3, abs=1e-10)
    assert fit.residual < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(41, 200), st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_cohomological_residual_is_small(p, q, amps):
    alpha = Fraction(p, q)
    g = FourierSeries.from_modes({k + 1: a for k, a in enumerate(amps)}, K=3)
    phi, _ = solve_cohomological(g, alpha, 3)
    assert cohomological_residual(phi, g, float(alpha)) < 1e-9 * max(1.0, norm_s(phi, 0))
    assert phi.mean == 0


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.integers(1, 5))
def test_real_series_evaluate_real(re, im, k):
    f = FourierSeries.from_modes({k: complex(re, im)}, K=5)
    th = np.linspace(0, 1, 9)
    assert np.allclose(f(th), 2 * (complex(re, im) * np.exp(2j * np.pi * k * th)).real)


def test_divisors_exact_rational_input():
    d = divisors(Rational(1, 4), np.array([[4]]), "discrete")
    assert abs(d[0]) < 1e-300 or d[0] == 0
