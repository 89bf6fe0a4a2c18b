"""Comparison results between optimal prevention levels, checked numerically.

Two dimensionless ratios carry every condition:

* ``period1_ratio(s, m, e) = E1[u'(w1 - e + R1)] / u'(w1 - e)`` -- at least 1
  for a prudent ``u`` and a zero-mean period-1 risk;
* ``period2_ratio(s, m) = (E2[v(w2 - l + R2)] - E2[v(w2 + R2)]) / (v(w2 - l) - v(w2))``
  -- at least 1 for a prudent ``v`` and a zero-mean period-2 risk.

Each condition value is signed so that ``value >= 0`` means the condition
holds.  Ordering gaps are signed the same way for the ordering statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import HypothesisNotMetError, PossprevError, PairNotComparableError, WitnessNotFoundError
from .ensemble import random_scenario
from .fuzzy import possibilistic_expected_value
from .models import FUZZY, REQUIRED, ModelId, Scenario, context, solve_optimal
from .stochastic import expected_value

GUARD_BAND = 1e-7
SUFFICIENT_TOL = 1e-9
LEMMA_TOL = 1e-10
ZERO_MEAN_TOL = 1e-9

B, M1, M4, M5, M6, M7, M8 = (ModelId.BENCHMARK, ModelId.M1, ModelId.M4, ModelId.M5,
                             ModelId.M6, ModelId.M7, ModelId.M8)


class ConditionId(str, Enum):
    P5_1 = "P5_1"
    C5_2 = "C5_2"
    P5_3 = "P5_3"
    L5_4 = "L5_4"
    C5_5 = "C5_5"
    P5_6 = "P5_6"
    R5_7 = "R5_7"
    P5_8 = "P5_8"
    R5_9 = "R5_9"
    P5_10 = "P5_10"
    R5_11 = "R5_11"
    P6_1 = "P6_1"
    C6_2 = "C6_2"
    P6_3 = "P6_3"
    C6_4 = "C6_4"
    P6_5 = "P6_5"
    C6_6 = "C6_6"
    GENERIC = "GenericPair"

    def __str__(self):
        return self.value


C = ConditionId

# left, right, and whether statement (i) reads "e_right <= e_left" (+1) or
# "e_right >= e_left" (-1)
EQUIVALENCES = {
    C.P5_1: (B, M4, +1),
    C.P5_3: (B, M5, -1),
    C.P5_6: (B, M6, -1),
    C.P5_8: (B, M7, -1),
    C.P5_10: (B, M8, -1),
    C.P6_1: (M4, M6, +1),
    C.P6_3: (M5, M6, +1),
    C.P6_5: (M1, M7, +1),
}

# sufficient conditions: models, direction of the conclusion, and which
# utility must be prudent / which period's risk must have zero mean
SUFFICIENT = {
    C.C5_2: (B, M4, +1, 1),
    C.C5_5: (B, M5, -1, 2),
    C.C6_2: (M4, M6, +1, 2),
    C.C6_4: (M5, M6, +1, 1),
    C.C6_6: (M1, M7, +1, 2),
}

AMBIGUITY = {C.R5_7: M6, C.R5_9: M7, C.R5_11: M8}

# the full comparison program (``--pair paper-set``): benchmark against
# models 4-8, then the eight one-risk-to-two-risk pairs
STANDARD_PAIRS = (
    (B, M4), (B, M5), (B, M6), (B, M7), (B, M8),
    (M1, ModelId.M3), (M1, M7), (ModelId.M2, ModelId.M3), (ModelId.M2, M8),
    (M4, M6), (M4, M8), (M5, M6), (M5, M7),
)


@dataclass(frozen=True)
class ComparisonCase:
    left: ModelId
    right: ModelId
    condition_id: ConditionId = C.GENERIC
    guard_band: float = GUARD_BAND

    def __post_init__(self):
        object.__setattr__(self, "left", ModelId.parse(self.left))
        object.__setattr__(self, "right", ModelId.parse(self.right))
        object.__setattr__(self, "condition_id", ConditionId(self.condition_id))
        if self.left == self.right:
            raise PairNotComparableError("a comparison needs two different models")

    @classmethod
    def for_condition(cls, cid, guard_band=GUARD_BAND) -> "ComparisonCase":
        cid = ConditionId(cid)
        if cid in EQUIVALENCES:
            left, right, _ = EQUIVALENCES[cid]
        elif cid in SUFFICIENT:
            left, right = SUFFICIENT[cid][:2]
        elif cid == C.L5_4:
            left, right = B, M5
        elif cid in AMBIGUITY:
            left, right = B, AMBIGUITY[cid]
        else:
            raise ValueError("GenericPair needs explicit models")
        return cls(left, right, cid, guard_band)


@dataclass(frozen=True)
class ComparisonVerdict:
    case: ComparisonCase
    e_left: float
    e_right: float
    ordering_holds: bool
    condition_holds: bool
    equivalence_respected: bool | None
    margin: float
    ordering_gap: float
    interior: bool = True

    @property
    def decided(self) -> bool:
        return self.equivalence_respected is not None


def period1_ratio(s: Scenario, m: ModelId, e: float) -> float:
    """Infinite when ``e`` pushes wealth onto the floor of ``u`` (``u' -> inf`` there)."""
    ctx = context(s, m)
    wealth = s.w1 - e
    if wealth + ctx.lo1 <= s.u.domain.lo:
        return math.inf
    return float(ctx.ws1 @ s.u.raw(1, wealth + ctx.xs1)) / float(s.u.raw(1, wealth))


def period2_ratio(s: Scenario, m: ModelId) -> float:
    return context(s, m).delta2 / context(s, B).delta2


def _added_period(left: ModelId, right: ModelId) -> int:
    """Period whose risk ``right`` adds to ``left``; error unless exactly one."""
    a, b = REQUIRED[left], REQUIRED[right]
    added = [i for i in (0, 1) if a[i] is None and b[i] is not None]
    same = [i for i in (0, 1) if a[i] == b[i]]
    if len(added) != 1 or len(same) != 1:
        raise PairNotComparableError(
            f"{left.value} -> {right.value} does not add exactly one period's risk")
    return added[0] + 1


def _solve(s, m, solved):
    if solved is not None and m in solved:
        return solved[m]
    r = solve_optimal(s, m)
    if solved is not None:
        solved[m] = r
    return r


def condition_value(s: Scenario, c: ComparisonCase, solved: dict | None = None) -> float:
    """Signed condition ``(ii)`` of the case's result; ``>= 0`` means it holds.

    The reference effort is the one the result names: the benchmark optimum
    for comparisons with the benchmark, the richer model's optimum for the
    period-1 condition between one- and two-risk models.
    """
    cid = c.condition_id
    if cid == C.P5_1:
        return period1_ratio(s, M4, _solve(s, B, solved).e_star) - 1.0
    if cid == C.P5_3:
        return period2_ratio(s, M5) - 1.0
    if cid in (C.P5_6, C.P5_8, C.P5_10):
        e = _solve(s, B, solved).e_star
        return period2_ratio(s, c.right) - period1_ratio(s, c.right, e)
    if cid in (C.P6_1, C.P6_5):
        return 1.0 - period2_ratio(s, c.right)
    if cid == C.P6_3:
        return period1_ratio(s, M6, _solve(s, M6, solved).e_star) - 1.0
    if cid == C.GENERIC:
        period = _added_period(c.left, c.right)
        if period == 2:
            return 1.0 - period2_ratio(s, c.right)
        return period1_ratio(s, c.right, _solve(s, c.right, solved).e_star) - 1.0
    raise ValueError(f"{cid} has no equivalence condition")


def _verdict(c, rl, rr, sign, value):
    gap = sign * (rl.e_star - rr.e_star)
    ordering = gap >= 0
    holds = value >= 0
    interior = rl.interior and rr.interior
    decided = interior and abs(gap) > c.guard_band and abs(value) > c.guard_band
    return ComparisonVerdict(c, rl.e_star, rr.e_star, ordering, holds,
                             (ordering == holds) if decided else None, value, gap, interior)


def verify_equivalence(s: Scenario, c: ComparisonCase) -> ComparisonVerdict:
    """Solve both models and test ``(i) <=> (ii)`` off the guard band.

    ``equivalence_respected`` is ``None`` for ties (either the ordering gap or
    the condition margin within ``guard_band``) and for corner optima, where
    the first-order conditions behind the equivalences do not apply.
    """
    if c.condition_id == C.GENERIC:
        return compare_pair(s, c.left, c.right, c.guard_band)
    left, right, sign = EQUIVALENCES[c.condition_id]
    solved = {}
    rl, rr = _solve(s, left, solved), _solve(s, right, solved)
    return _verdict(c, rl, rr, sign, condition_value(s, c, solved))


def compare_pair(s: Scenario, left, right, guard_band: float = GUARD_BAND) -> ComparisonVerdict:
    """Generic one-risk-added comparison.

    Statement (i) is ``e_right <= e_left``.  Adding a period-2 risk it holds
    iff ``period2_ratio <= 1``; adding a period-1 risk it holds iff
    ``period1_ratio >= 1`` at the richer model's optimum.
    """
    left, right = ModelId.parse(left), ModelId.parse(right)
    c = ComparisonCase(left, right, C.GENERIC, guard_band)
    _added_period(left, right)
    solved = {}
    rl, rr = _solve(s, left, solved), _solve(s, right, solved)
    return _verdict(c, rl, rr, +1, condition_value(s, c, solved))


def _risk_mean(s, m, period):
    kind = REQUIRED[m][period - 1]
    r = s.risk(period, kind)
    return possibilistic_expected_value(r, s.f) if kind == FUZZY else expected_value(r)


def check_hypotheses(s: Scenario, cid: ConditionId):
    """Raise :class:`HypothesisNotMetError` unless prudence and zero mean hold."""
    cid = ConditionId(cid)
    if cid == C.L5_4:
        period, model = 2, M5
    else:
        left, right, _, period = SUFFICIENT[cid]
        model = right
    util = s.u if period == 1 else s.v
    if not util.prudent:
        raise HypothesisNotMetError(f"{cid}: period-{period} utility {util!r} is not prudent")
    mean = _risk_mean(s, model, period)
    if abs(mean) > ZERO_MEAN_TOL:
        raise HypothesisNotMetError(f"{cid}: period-{period} risk has mean {mean:.3g}, not 0")


def lemma_gap(s: Scenario) -> float:
    """``[v(w2-l) - v(w2)] - [E_f(v(w2-l+B)) - E_f(v(w2+B))]``; non-negative under prudence."""
    return context(s, B).delta2 - context(s, M5).delta2


def verify_sufficient(s: Scenario, c: ComparisonCase, tol: float = SUFFICIENT_TOL) -> ComparisonVerdict:
    """Check a sufficient-condition result on ``s`` after validating its hypotheses.

    ``ordering_holds`` reports the stated conclusion (to ``tol``), and
    ``condition_holds`` the corresponding equivalence condition.  For the
    lemma, ``margin`` is :func:`lemma_gap` and both flags report its sign.
    """
    cid = c.condition_id
    check_hypotheses(s, cid)
    if cid == C.L5_4:
        gap = lemma_gap(s)
        ok = gap >= -LEMMA_TOL
        return ComparisonVerdict(c, math.nan, math.nan, ok, ok, None, gap, math.nan)
    left, right, sign, _ = SUFFICIENT[cid]
    solved = {}
    rl, rr = _solve(s, left, solved), _solve(s, right, solved)
    gap = sign * (rl.e_star - rr.e_star)
    eq_case = {C.C5_2: C.P5_1, C.C5_5: C.P5_3, C.C6_2: C.P6_1,
               C.C6_4: C.P6_3, C.C6_6: C.P6_5}[cid]
    value = condition_value(s, ComparisonCase(left, right, eq_case), solved)
    return ComparisonVerdict(c, rl.e_star, rr.e_star, gap >= -tol, value >= -tol, None,
                             value, gap, rl.interior and rr.interior)


@dataclass(frozen=True)
class AmbiguityWitnesses:
    remark: ConditionId
    below: Scenario      # benchmark optimum strictly below the risky model's
    above: Scenario      # benchmark optimum strictly above
    below_gap: float
    above_gap: float
    tried: int


def search_ambiguity(generator, remark, budget: int = 10_000, seed: int = 0,
                     guard_band: float = GUARD_BAND) -> AmbiguityWitnesses:
    """Find scenarios with ``e* < e_k*`` and ``e* > e_k*``.

    ``generator(rng, i)`` returns the ``i``-th candidate scenario; the search is
    deterministic for a given ``seed``.
    """
    remark = ConditionId(remark)
    target = AMBIGUITY[remark]
    rng = np.random.default_rng(seed)
    below = above = None
    for i in range(budget):
        s = generator(rng, i)
        try:
            e0 = solve_optimal(s, B).e_star
            ek = solve_optimal(s, target).e_star
        except PossprevError:
            continue
        if below is None and ek - e0 > guard_band:
            below = (s, ek - e0)
        elif above is None and e0 - ek > guard_band:
            above = (s, e0 - ek)
        if below and above:
            return AmbiguityWitnesses(remark, below[0], above[0], below[1], above[1], i + 1)
    raise WitnessNotFoundError(
        f"{remark}: no {'e* < e_k*' if below is None else 'e* > e_k*'} witness "
        f"within {budget} scenarios")


def prudent_generator(rng, i):
    """Prudent, zero-mean candidates with period spreads drawn independently."""
    return random_scenario(rng, prudent=True, zero_mean=True, name=f"candidate-{i}")
