"""Finite-horizon verdicts for the conditions B, R-discrete, BR and R-continuous.

None of these conditions is decidable from finitely many terms; the report only
states whether the computed series *trend* like members or non-members, and
always carries the raw series and an explicit caveat.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from .alpha import AlphaInput, Rational
from .contfrac import ConvergentTable, bruno_sum_partial, cf_expand, russmann_sequence
from .psi import FrequencyVector, br_integral_series, psi_table, s0_series

CAVEAT = "heuristic at finite horizon: B, R and BR are tail conditions and cannot be decided numerically"

CONSISTENT = "consistent"
DIVERGENT = "divergent trend"
PERIODIC = "resonant/periodic"
UNDETERMINED = "undetermined (horizon too short)"


@dataclass(frozen=True)
class Thresholds:
    """Knobs of the trend heuristics.

    r_zero: a Russmann ratio below this counts as already at zero.
    r_decay: minimal relative decrease of the last ratio step for R-discrete.
    b_exponent: B holds if the last ratios decay at least like n^-b_exponent
        (local power-law exponent averaged over the last two steps).
    rc_fraction: R-continuous holds if the last ln Psi(Q)/Q is below this share of its max.
    br_tail: BR holds if the integral gained at most this much over [Q/2, Q].
    """

    r_zero: float = 0.05
    r_decay: float = 0.03
    b_exponent: float = 1.0
    rc_fraction: float = 0.5
    br_tail: float = 0.15


@dataclass
class ClassReport:
    input: str
    horizon: int
    bruno_partial: list = field(default_factory=list)
    russmann_tail: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    caveat: str = CAVEAT
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _verdict_r_discrete(ratios: np.ndarray, th: Thresholds) -> str:
    if len(ratios) < 3:
        return UNDETERMINED
    last, prev = ratios[-1], ratios[-2]
    if last <= th.r_zero:
        return CONSISTENT
    if prev > 0 and (prev - last) / prev >= th.r_decay:
        return CONSISTENT
    return DIVERGENT


def _verdict_b(ratios: np.ndarray, th: Thresholds) -> str:
    N = len(ratios) - 1
    if N < 3:
        return UNDETERMINED
    n = np.arange(N - 2, N + 1, dtype=float)
    t = ratios[N - 2:]
    if np.any(t <= 0):
        return CONSISTENT if t[-1] == 0 else UNDETERMINED
    exponents = -np.diff(np.log(t)) / np.diff(np.log(n))
    return CONSISTENT if exponents.mean() > th.b_exponent else DIVERGENT


def classify_table(table: ConvergentTable, label: str, thresholds: Thresholds = Thresholds()) -> ClassReport:
    horizon = table.depth
    if table.terminal:
        return ClassReport(label, horizon, verdicts={"B": PERIODIC, "R-discrete": PERIODIC},
                           extra={"note": "terminating expansion: no small-divisor condition applies"})
    N = horizon - 1
    ratios = russmann_sequence(table, N)
    sums = [bruno_sum_partial(table, n) for n in range(N + 1)]
    extra = {"provenance": table.provenance}
    if table.note:
        extra["note"] = table.note
    return ClassReport(
        label,
        horizon,
        bruno_partial=[float(s) for s in sums],
        russmann_tail=[float(r) for r in ratios],
        verdicts={"B": _verdict_b(ratios, thresholds), "R-discrete": _verdict_r_discrete(ratios, thresholds)},
        extra=extra,
    )


def classify_vector(omega: FrequencyVector, horizon: int, thresholds: Thresholds = Thresholds()) -> ClassReport:
    table = psi_table(omega, horizon)
    br = br_integral_series(table)
    s0 = s0_series(table)
    Q = horizon
    half = max(1, Q // 2)
    gain = float(br[-1] - br[half - 1])
    if Q < 4:
        v_br = v_rc = UNDETERMINED
    else:
        v_br = CONSISTENT if gain <= thresholds.br_tail else DIVERGENT
        v_rc = CONSISTENT if s0[-1] <= thresholds.rc_fraction * s0.max() else DIVERGENT
    return ClassReport(
        omega.describe(),
        horizon,
        bruno_partial=[float(x) for x in br],
        russmann_tail=[float(x) for x in s0],
        verdicts={"BR": v_br, "R-continuous": v_rc},
        extra={"br_gain_last_half": gain, "s0_estimate": float(s0.max())},
    )


def classify(
    x: Union[AlphaInput, ConvergentTable, FrequencyVector],
    horizon: int,
    thresholds: Thresholds = Thresholds(),
) -> ClassReport:
    """Classify a scalar alpha (via its continued fraction up to ``horizon``
    quotients) or a frequency vector (via Psi up to ``Q = horizon``)."""
    if isinstance(x, FrequencyVector):
        return classify_vector(x, horizon, thresholds)
    if isinstance(x, ConvergentTable):
        return classify_table(x, f"table [0; {','.join(map(str, x.quotients[:6]))}...]", thresholds)
    if isinstance(x, Rational):
        return ClassReport(x.describe(), horizon, verdicts={"B": PERIODIC, "R-discrete": PERIODIC},
                           extra={"note": "rational input: no small-divisor condition applies"})
    return classify_table(cf_expand(x, horizon), x.describe(), thresholds)
