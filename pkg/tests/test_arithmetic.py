import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brlab.arithmetic.alpha import DecimalString, Quotients, Rational, Surd, parse_alpha
from brlab.arithmetic.classify import CONSISTENT, DIVERGENT, PERIODIC, classify
from brlab.arithmetic.contfrac import (
    EXACT,
    PRECISION_LIMITED,
    ConvergentTable,
    GrowthSpec,
    bruno_sum_partial,
    cf_expand,
    construct_alpha,
    ratio_bound,
    russmann_sequence,
)
from brlab.arithmetic.psi import FrequencyVector, br_integral_partial, psi, psi_table, s0_estimate
from brlab.errors import ConfigError, DepthError, PrecisionExhausted, ResonanceError


def fibonacci(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def bruno_oracle(q, N):
    with mpmath.workdps(50):
        return float(sum(mpmath.log(q[n + 1]) / q[n] for n in range(N + 1)))


# continued fractions


def test_golden_denominators_are_fibonacci(golden_surd):
    t = cf_expand(golden_surd, 30)
    assert t.quotients == (1,) * 30
    assert t.q == tuple(fibonacci(n + 1) for n in range(31))
    t.check_invariants()


def test_rational_terminates_exactly():
    t = cf_expand(Rational(355, 113), 10)
    assert t.quotients == (7, 16)
    assert t.terminal and t.provenance == EXACT
    assert t.convergent(t.depth) == Fraction(16, 113)


def test_sqrt2_surd_quotients():
    t = cf_expand(Surd(0, 1, 2, 1), 12)
    assert t.quotients == (2,) * 12


def test_surd_with_negative_denominator_matches_mpmath():
    x = Surd(3, -2, 7, -5)  # (2 sqrt 7 - 3) / 5
    t = cf_expand(x, 15)
    with mpmath.workdps(80):
        y = x.mpf(80) - mpmath.floor(x.mpf(80))
        ref = []
        for _ in range(15):
            y = 1 / y
            a = int(mpmath.floor(y))
            ref.append(a)
            y -= a
    assert list(t.quotients) == ref


def test_decimal_precision_exhausted():
    with pytest.raises(PrecisionExhausted):
        cf_expand(DecimalString("0.5000"), 3)


def test_decimal_is_precision_limited():
    t = cf_expand(DecimalString("0.6180339887"), 40)
    assert t.provenance == PRECISION_LIMITED
    assert 5 < t.depth < 40
    assert set(t.quotients) == {1}


def test_quotient_list_shorter_than_depth():
    t = cf_expand(Quotients((1, 2, 3)), 5)
    assert t.depth == 3 and t.provenance == PRECISION_LIMITED


def test_depth_must_be_positive(golden_surd):
    with pytest.raises(ConfigError):
        cf_expand(golden_surd, 0)


def test_parse_alpha_forms():
    assert parse_alpha("355/113") == Rational(355, 113)
    assert parse_alpha("cf:1,2,3") == Quotients((1, 2, 3))
    assert parse_alpha("surd:-1,1,5,2") == Surd(-1, 1, 5, 2)
    assert isinstance(parse_alpha("0.25"), DecimalString)
    with pytest.raises(ConfigError):
        parse_alpha("1/0")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 10**6), min_size=1, max_size=40))
def test_determinant_identity_holds_for_any_quotients(quotients):
    t = ConvergentTable.from_quotients(quotients)
    t.check_invariants()
    assert t.convergent(t.depth) == Quotients(tuple(quotients)).exact_value()


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10**9), st.integers(1, 10**9))
def test_rational_expansion_round_trips(p, q):
    x = Rational(p, q)
    if x.reduced() == 0:
        return
    t = cf_expand(x, 100)
    assert t.terminal
    assert t.convergent(t.depth) == x.reduced()


# Bruno sums and growth constructions


def test_golden_bruno_partial_sum(golden_surd):
    t = cf_expand(golden_surd, 10)
    value = bruno_sum_partial(t, 6)
    assert value == pytest.approx(2.7496, abs=1e-3)
    assert value == pytest.approx(bruno_oracle(t.q, 6), abs=1e-12)


def test_bruno_needs_depth(golden_surd):
    with pytest.raises(DepthError):
        bruno_sum_partial(cf_expand(golden_surd, 5), 5)


def test_russmann_sequence_golden_decays(golden_surd):
    r = russmann_sequence(cf_expand(golden_surd, 20), 19)
    assert np.all(np.diff(r[2:]) < 0)


def test_constant_ratio_construction(liouville):
    table, rat = liouville
    assert table.quotients[:3] == (1, 3, 14)
    assert table.q[:4] == (1, 1, 4, 57)
    table.check_invariants()
    assert rat == Rational(table.p[-1], table.q[-1])
    # the digit budget stops the construction; the table says so
    assert table.depth == 4 and "truncated" in table.note
    r = russmann_sequence(table, table.depth - 1)
    assert abs(r[-1] - 1.0) < 0.1
    assert abs(r[-2] - 1.0) < 0.1


def test_ratio_bound_tracks_target():
    table, _ = construct_alpha(GrowthSpec("square", 1.0), 20)
    for n in range(2, table.depth):
        assert ratio_bound(table, n) >= 0


def test_growth_spec_validates():
    with pytest.raises(ConfigError):
        GrowthSpec("cubic", 1.0)


# Psi scans


def brute_psi(omega, Q, norm="l1"):
    best = None
    n = len(omega)
    import itertools

    for k in itertools.product(range(-Q, Q + 1), repeat=n):
        size = sum(map(abs, k)) if norm == "l1" else max(map(abs, k))
        if size == 0 or size > Q:
            continue
        v = abs(sum(a * b for a, b in zip(k, omega)))
        best = v if best is None else min(best, v)
    return 1 / best


def test_psi_golden_small_Q(gamma):
    om = FrequencyVector((1, Surd(-1, 1, 5, 2)))
    v1, k1 = psi(om, 1)
    v2, k2 = psi(om, 2)
    assert v1 == pytest.approx(1.6180340, abs=1e-6) and k1 == (0, 1)
    assert v2 == pytest.approx(2.6180340, abs=1e-6) and k2 == (1, -1)
    assert v1 == pytest.approx(brute_psi((1, gamma), 1), abs=1e-9)
    assert v2 == pytest.approx(brute_psi((1, gamma), 2), abs=1e-9)


def test_psi_resonance():
    with pytest.raises(ResonanceError) as err:
        psi(FrequencyVector((1.0, 0.5)), 3)
    assert err.value.k == (1, -2)


def test_psi_monotone_and_matches_brute_force(gamma):
    om = FrequencyVector((1.0, gamma))
    t = psi_table(om, 50)
    assert np.all(np.diff(t.psi) >= 0)
    for Q in (3, 7, 13):
        assert t.psi[Q - 1] == pytest.approx(brute_psi((1, gamma), Q), rel=1e-12)


def test_psi_three_frequencies():
    om = FrequencyVector((1.0, 2 ** 0.5, 3 ** 0.5))
    t = psi_table(om, 8)
    assert t.psi[-1] == pytest.approx(brute_psi((1, 2**0.5, 3**0.5), 8), rel=1e-12)


def test_psi_dominates_convergent_denominators(golden_surd):
    # Psi(q_n) >= q_{n+1} / 2 in the sup norm
    t = cf_expand(golden_surd, 12)
    table = psi_table(FrequencyVector((1, golden_surd), "linf"), t.q[11])
    for n in range(2, 11):
        assert table.psi[t.q[n] - 1] >= t.q[n + 1] / 2


def test_br_integral_and_s0_for_liouville(liouville):
    _, rat = liouville
    om = FrequencyVector((1, rat))
    assert om.mode == "exact"
    assert s0_estimate(om, 4) == pytest.approx(0.702, abs=2e-3)
    assert s0_estimate(FrequencyVector((1, rat), "linf"), 4) == pytest.approx(1.404, abs=2e-3)
    assert br_integral_partial(om, 30) > 0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 0.99).filter(lambda x: abs(x - 0.5) > 1e-3), st.integers(2, 25))
def test_psi_is_monotone_in_Q(a, Q):
    try:
        t = psi_table(FrequencyVector((1.0, a)), Q)
    except ResonanceError:
        return
    assert np.all(np.diff(t.psi) >= 0)


# classification


def test_classify_golden(golden_surd):
    rep = classify(golden_surd, 12)
    assert rep.verdicts == {"B": CONSISTENT, "R-discrete": CONSISTENT}
    assert "heuristic" in rep.caveat


def test_classify_constant_ratio(liouville):
    table, _ = liouville
    rep = classify(table, table.depth)
    assert rep.verdicts["R-discrete"] == DIVERGENT
    assert rep.verdicts["B"] == DIVERGENT


def test_classify_log_growth_is_bruno_divergent_only():
    table, _ = construct_alpha(GrowthSpec("log", 1.0), 8)
    rep = classify(table, table.depth)
    assert rep.verdicts["B"] == DIVERGENT
    assert rep.verdicts["R-discrete"] == CONSISTENT


def test_classify_rational_is_periodic():
    rep = classify(Rational(3, 7), 10)
    assert set(rep.verdicts.values()) == {PERIODIC}


def test_classify_report_fields(golden_surd):
    d = classify(golden_surd, 8).to_dict()
    for key in ("input", "horizon", "bruno_partial", "russmann_tail", "verdicts", "caveat"):
        assert key in d
    assert math.isclose(d["bruno_partial"][6], 2.749633640728392, rel_tol=1e-12)
