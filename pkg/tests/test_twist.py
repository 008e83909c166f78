import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brlab.analytic import FourierSeries
from brlab.circle import CircleMapLift
from brlab.errors import CertificationError, DomainExit
from brlab.twist import (
    GeneratingFunction,
    IntegrableGenerating,
    IntegrableTwistMap,
    TwistState,
    build_explicit_map,
    invariant_level,
    jacobian_det,
    level_scan,
    orbit_rotation,
    step_implicit,
    twist_check,
)


@pytest.fixture
def h0(gamma):
    return IntegrableGenerating.quadratic(gamma)


def test_integrable_generating_records_alpha(h0, gamma):
    assert h0.alpha == gamma and h0.twist_sign == 1


def test_b1_rejects_vanishing_curvature():
    with pytest.raises(CertificationError):
        IntegrableGenerating([0.0, 0.3, 0.0, 1.0])  # h0'' = 6 I changes sign


def test_implicit_integrable_step():
    gen = GeneratingFunction.integrable(IntegrableGenerating([0, 0, 0.5]))
    s = step_implicit(gen, TwistState(0.2, 0.3))
    assert s.theta == pytest.approx(0.5) and s.I == pytest.approx(0.3)


def test_implicit_standard_map_closed_form():
    eps = 0.01
    gen = GeneratingFunction.standard(IntegrableGenerating([0, 0, 0.5]), eps)
    th, I = 0.13, 0.2
    s = gen.step(TwistState(th, I))
    Ip = I + 2 * np.pi * eps * np.sin(2 * np.pi * th)
    assert s.I == pytest.approx(Ip, abs=1e-15)
    assert s.theta == pytest.approx(th + Ip, abs=1e-15)


def test_contraction_violation_is_rejected(h0):
    with pytest.raises(CertificationError):
        GeneratingFunction.linear_perturbation(h0, FourierSeries.cosine(0.2, 1))  # sup|v'| = 0.4 pi > 1


def test_state_outside_domain():
    with pytest.raises(DomainExit):
        TwistState(0.0, 1.0)


def test_explicit_map_with_zero_v_is_integrable(h0):
    fmap = build_explicit_map(h0, FourierSeries.zeros(1, 1), 1e-3, 0.1)
    s = fmap.step(TwistState(0.3, 0.4))
    t = IntegrableTwistMap(h0).step(TwistState(0.3, 0.4))
    assert (s.theta, s.I) == pytest.approx((t.theta, t.I), abs=1e-15)


def test_budget_exceeded(h0):
    with pytest.raises(CertificationError, match="budget"):
        build_explicit_map(h0, FourierSeries.cosine(1e-2, 1), 1e-3, 0.1)


def test_zero_section_and_restriction(h0, gamma):
    v = FourierSeries.from_modes({1: 0.002, 2: 0.001j})
    fmap = build_explicit_map(h0, v, 1.0, 0.1)
    th = np.arange(256) / 256
    Theta, Ip = fmap.step_arrays(th, np.zeros_like(th))
    assert np.abs(Ip).max() <= 1e-15
    assert np.abs(Theta - CircleMapLift(gamma, v)(th)).max() <= 1e-14


def test_area_preservation_explicit_map(h0):
    fmap = build_explicit_map(h0, FourierSeries.cosine(1e-2, 1), 1.0, 0.1)
    rng = np.random.default_rng(0)
    for a, b in zip(rng.random(50), rng.uniform(-0.5, 0.5, 50)):
        assert jacobian_det(fmap.step, TwistState(a, b)) == pytest.approx(1.0, abs=1e-8)
    # closed form: det = (1 + v') / u' = 1
    th = np.linspace(0, 1, 33)
    assert np.allclose((1 + fmap.dv(th)) / fmap.u_prime(th), 1.0, atol=1e-15)


def test_area_preservation_integrable_and_standard(h0):
    s = TwistState(0.3, 0.1)
    assert jacobian_det(IntegrableTwistMap(h0).step, s) == pytest.approx(1.0, abs=1e-10)
    gen = GeneratingFunction.standard(h0, 0.01)
    assert jacobian_det(gen.step, s) == pytest.approx(1.0, abs=1e-8)


def test_explicit_implicit_agreement(h0):
    v = FourierSeries.from_modes({1: 0.01, 3: 0.002j})
    fmap = build_explicit_map(h0, v, 1.0, 0.1)
    gen = GeneratingFunction.linear_perturbation(h0, v)
    rng = np.random.default_rng(3)
    for a, b in zip(rng.random(100), rng.uniform(-0.5, 0.5, 100)):
        e, i = fmap.step(TwistState(a, b)), gen.step(TwistState(a, b))
        assert abs(e.theta - i.theta) <= 1e-10 and abs(e.I - i.I) <= 1e-10


def test_twist_check_closed_form(h0):
    fmap = build_explicit_map(h0, FourierSeries.cosine(1e-2, 1), 1.0, 0.1)
    rep = twist_check(fmap, np.linspace(0, 1, 17)[:-1], np.linspace(-0.5, 0.5, 5))
    assert rep.passes and rep.sign == 1
    assert rep.fd_min == pytest.approx(rep.closed_min, rel=1e-6)
    th = np.linspace(0, 1, 1025)
    assert rep.closed_min == pytest.approx(1.0 / fmap.u_prime(th).max(), rel=0.1)


def test_twist_check_integrable_and_reversed(gamma):
    rep = twist_check(IntegrableTwistMap(IntegrableGenerating([0, 0, 0.5])), [0.0, 0.5], [-0.5, 0.0, 0.5])
    assert rep.fd_min == pytest.approx(1.0) and rep.fd_max == pytest.approx(1.0)
    rev = build_explicit_map(IntegrableGenerating([0, gamma, -0.5]), FourierSeries.cosine(1e-3, 1), 1.0, 0.1)
    rep = twist_check(rev, [0.0, 0.25, 0.5], [-0.5, 0.5])
    assert rep.passes and rep.sign == -1 and "reversed" in rep.note


def test_orbit_rotation_integrable(h0, gamma):
    _, est = orbit_rotation(IntegrableTwistMap(h0), TwistState(0.0, 0.2), 2000)
    assert est.rho == pytest.approx(gamma + 0.2, abs=1e-12)


def test_orbit_rotation_matches_circle(h0, gamma):
    v = FourierSeries.cosine(1e-3, 1)
    fmap = build_explicit_map(h0, v, 1.0, 0.1)
    _, est = orbit_rotation(fmap, TwistState(0.0, 0.0), 10000)
    ref = CircleMapLift(gamma, v).rotation_number(n=10000)
    assert est.rho == pytest.approx(ref.rho, abs=1e-8)


def test_orbit_domain_exit_reports_step():
    gen = GeneratingFunction.standard(IntegrableGenerating([0, 0, 0.5]), 0.1)
    with pytest.raises(DomainExit) as err:
        orbit_rotation(gen, TwistState(0.25, 0.9), 100)
    assert err.value.step == 1


def test_integrable_level_uniqueness(h0, gamma):
    levels = np.linspace(-0.9, 0.9, 181)
    I_star = invariant_level(h0, gamma + 0.3)
    assert I_star == pytest.approx(0.3, abs=1e-12)
    assert level_scan(h0, gamma + 0.3, levels) == [pytest.approx(0.3)]


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.01, 0.01), st.floats(-0.01, 0.01), st.floats(0, 1), st.floats(-0.8, 0.8))
def test_explicit_map_properties(a, b, theta, I):
    v = FourierSeries.from_modes({1: complex(a, b), 2: complex(b, -a) / 2})
    fmap = build_explicit_map(IntegrableGenerating.quadratic(0.4), v, 1.0, 0.0)
    t, p = fmap.step_arrays(theta, 0.0)
    assert p == 0.0
    try:
        d = jacobian_det(fmap.step, TwistState(theta, I))
    except DomainExit:
        return
    assert d == pytest.approx(1.0, abs=1e-7)
