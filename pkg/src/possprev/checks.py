"""Randomized verification suites behind ``possprev check``.

Every line of a suite draws from its own generator seeded by ``(seed, label)``
so results do not depend on which suites run or in what order.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .ensemble import admissible_scenarios, random_fuzzy, random_scenario, random_weighting
from .errors import DomainError, PossprevError
from .fuzzy import (FuzzyNumber, Interval, ScalarFunction, identity,
                    possibilistic_expected_utility, possibilistic_expected_value)
from .models import ALL_MODELS, ModelId, foc_sides, marginal_utility, solve_optimal
from .oracle import (OracleConfig, oracle_argmax, oracle_discrete_expectation,
                     oracle_expected_utility)
from .preferences import UtilityFunction
from .scenario_io import scenario_to_dict
from .stochastic import DiscreteRandomVariable, probabilistic_expected_utility
from .theorems import (AMBIGUITY, EQUIVALENCES, LEMMA_TOL, SUFFICIENT, SUFFICIENT_TOL,
                       ComparisonCase, ConditionId, condition_value, period1_ratio, period2_ratio,
                       prudent_generator, search_ambiguity, verify_equivalence,
                       verify_sufficient)

JENSEN_TOL = 1e-10
LINEARITY_TOL = 1e-9
QUAD_TOL = 1e-6
REDUCTION_TOL = 1e-12
FOC_RTOL = 1e-9
DEGENERACY_TOL = 1e-9
RATIO_TOL = 1e-10
BOUNDARY_TOL = 1e-8
MAX_REPLAYS = 3
REVERSED = (ConditionId.C6_2, ConditionId.C6_6)


@dataclass
class CheckLine:
    suite: str
    label: str
    passed: int = 0
    failed: int = 0
    undecided: int = 0
    worst: float = math.nan
    limit: float = math.nan
    note: str = ""
    replays: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.passed > 0

    def tally(self, good: bool, value=None, scenario=None, higher_is_worse=True):
        if good:
            self.passed += 1
        else:
            self.failed += 1
            if scenario is not None and len(self.replays) < MAX_REPLAYS:
                self.replays.append(scenario_to_dict(scenario))
        if value is not None and not math.isnan(value):
            if math.isnan(self.worst):
                self.worst = value
            else:
                self.worst = max(self.worst, value) if higher_is_worse else min(self.worst, value)

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        parts = [f"{status}  {self.suite:<8} {self.label:<22} pass={self.passed} fail={self.failed}"]
        if self.undecided:
            parts.append(f"ties={self.undecided}")
        if not math.isnan(self.worst):
            parts.append(f"worst={self.worst:.3e}")
        if not math.isnan(self.limit):
            parts.append(f"limit={self.limit:.0e}")
        if self.note:
            parts.append(self.note)
        return "  ".join(parts)


def _rng(seed, label):
    return np.random.default_rng([int(seed), zlib.crc32(label.encode())])


# convex test functions: (name, callable, domain offset needed for A)
def _convex_family(rng):
    c = rng.uniform(-1, 1)
    k = rng.uniform(0.5, 3)
    choices = [
        ("square", ScalarFunction(lambda x: (x - c) ** 2, name="square"), 0.0),
        ("exp", ScalarFunction(lambda x: np.exp(x / k), name="exp"), 0.0),
        ("quartic", ScalarFunction(lambda x: (x - c) ** 4, name="quartic"), 0.0),
        ("softplus", ScalarFunction(lambda x: np.logaddexp(0.0, k * x), name="softplus"), 0.0),
        ("neglog", ScalarFunction(lambda x: -np.log(x), Interval(0.0), name="neglog"), 1.0),
        ("inverse", ScalarFunction(lambda x: 1.0 / x, Interval(0.0), name="inverse"), 1.0),
        ("crra_marginal", UtilityFunction.crra(k).derivative(1), 1.0),
    ]
    return choices[rng.integers(len(choices))]


def _any_family(rng):
    a = rng.uniform(-2, 2)
    choices = [
        lambda x: np.sin(x + a), lambda x: x ** 3, lambda x: np.exp(-x * x),
        lambda x: np.cos(2 * x) * x, lambda x: np.tanh(x - a), lambda x: x,
    ]
    return choices[rng.integers(len(choices))]


def _random_fuzzy_number(rng):
    f = random_weighting(rng)
    return random_fuzzy(rng, rng.uniform(0.0, 3.0), f).shifted(rng.uniform(-2, 2)), f


def _place(A, offset):
    # move A into (0, inf) when the test function needs positive arguments
    if offset:
        lo, _ = A.support
        A = A.shifted(offset - min(lo, 0.0))
    return A


def jensen_suite(seed=0, count=500):
    lines = []
    line = CheckLine("jensen", "jensen(convex u)", limit=JENSEN_TOL)
    rng = _rng(seed, line.label)
    for _ in range(count):
        A, f = _random_fuzzy_number(rng)
        name, u, offset = _convex_family(rng)
        A = _place(A, offset)
        lhs = float(u(possibilistic_expected_value(A, f)))
        rhs = possibilistic_expected_utility(A, f, u)
        line.tally(lhs <= rhs + JENSEN_TOL, lhs - rhs)
    lines.append(line)

    line = CheckLine("jensen", "linearity", limit=LINEARITY_TOL)
    rng = _rng(seed, line.label)
    for _ in range(count):
        A, f = _random_fuzzy_number(rng)
        g, h = _any_family(rng), _any_family(rng)
        a, b = rng.uniform(-5, 5, 2)
        combo = possibilistic_expected_utility(A, f, lambda x: a * g(x) + b * h(x))
        parts = a * possibilistic_expected_utility(A, f, g) + b * possibilistic_expected_utility(A, f, h)
        gap = abs(combo - parts)
        line.tally(gap <= LINEARITY_TOL, gap)
    lines.append(line)
    return lines


def oracle_suite(seed=0, count=200):
    cfg = OracleConfig()
    lines = []
    quad = CheckLine("oracle", "quadrature-vs-midpoint", limit=QUAD_TOL)
    red = CheckLine("oracle", "identity-reduction", limit=REDUCTION_TOL)
    rng = _rng(seed, quad.label)
    for _ in range(count):
        A, f = _random_fuzzy_number(rng)
        name, u, offset = _convex_family(rng) if rng.random() < 0.5 else \
            ("any", _any_family(rng), 0.0)
        A = _place(A, offset)
        main = possibilistic_expected_utility(A, f, u)
        gap = cfg.record(main, oracle_expected_utility(A, f, u, cfg))
        quad.tally(gap <= QUAD_TOL, gap)
        diff = abs(possibilistic_expected_utility(A, f, identity) - possibilistic_expected_value(A, f))
        red.tally(diff <= REDUCTION_TOL, diff)
    lines += [quad, red]

    disc = CheckLine("oracle", "discrete-exhaustive", limit=1e-12)
    rng = _rng(seed, disc.label)
    for _ in range(count):
        n = int(rng.integers(1, 8))
        X = DiscreteRandomVariable(np.column_stack([rng.uniform(-3, 3, n), rng.dirichlet(np.ones(n))]))
        u = _any_family(rng)
        gap = abs(probabilistic_expected_utility(X, u) - oracle_discrete_expectation(X, u))
        disc.tally(gap <= 1e-12, gap)
    lines.append(disc)
    return lines


def foc_suite(seed=0, count=100):
    """First-order conditions, strict concavity and oracle argmax for all nine models."""
    cfg = OracleConfig(gamma_grid_size=10_000)
    foc = CheckLine("focs", "foc-relative-residual", limit=FOC_RTOL)
    mono = CheckLine("focs", "v-prime-decreasing")
    arg = CheckLine("focs", "solver-vs-grid-argmax", limit=cfg.effort_grid_step)
    rng = _rng(seed, "focs")
    for i in range(count):
        s = random_scenario(rng, name=f"focs-{i}")
        for m in ALL_MODELS:
            try:
                r = solve_optimal(s, m)
            except DomainError:
                continue
            if r.interior:
                lhs, rhs = foc_sides(s, m, r.e_star)
                rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
                foc.tally(rel <= FOC_RTOL, rel, s)
            else:
                foc.undecided += 1
            grid = np.linspace(0.0, r.upper_bound, 100)
            vp = marginal_utility(s, m, grid)
            mono.tally(bool(np.all(np.diff(vp) < 0)), scenario=s)
            gap = abs(r.e_star - oracle_argmax(s, m, cfg))
            arg.tally(gap <= cfg.effort_grid_step, gap, s)
    foc.note = "corner optima counted as ties"

    deg = CheckLine("focs", "degeneracy", limit=DEGENERACY_TOL)
    rng = _rng(seed, deg.label)
    for i in range(count):
        s = random_scenario(rng, name=f"degenerate-{i}")
        s = s.replace(risk1=(FuzzyNumber.crisp(0.0), DiscreteRandomVariable.point_mass(0.0)),
                      risk2=(FuzzyNumber.crisp(0.0), DiscreteRandomVariable.point_mass(0.0)))
        try:
            es = [solve_optimal(s, m).e_star for m in ALL_MODELS]
        except DomainError:
            continue
        spread = max(es) - min(es)
        deg.tally(spread <= DEGENERACY_TOL, spread, s)
    return [foc, mono, arg, deg]


def equivalence_lines(seed=0, count=1000, band=None):
    lines = []
    for cid, (left, right, _) in EQUIVALENCES.items():
        line = CheckLine("theorems", f"{cid} equivalence")
        rng = _rng(seed, line.label)
        case = ComparisonCase.for_condition(cid) if band is None else \
            ComparisonCase.for_condition(cid, band)
        for s, _ in admissible_scenarios(rng, [left, right], count):
            v = verify_equivalence(s, case)
            if v.decided:
                line.tally(v.equivalence_respected, scenario=s)
            else:
                line.undecided += 1
        lines.append(line)
    return lines


def sufficient_lines(seed=0, count=1000):
    """Each sufficient ordering as stated, plus the reversed ordering where it fails."""
    lines = []
    for cid in SUFFICIENT:
        line = CheckLine("theorems", f"{cid} as stated", limit=SUFFICIENT_TOL)
        rng = _rng(seed, line.label)
        case = ComparisonCase.for_condition(cid)
        for s, _ in admissible_scenarios(rng, SUFFICIENT[cid][:2], count,
                                         prudent=True, zero_mean=True):
            v = verify_sufficient(s, case)
            line.tally(v.ordering_holds, -v.ordering_gap, s)
        lines.append(line)
        if cid in REVERSED:
            # the ratio argument orders these pairs the other way round
            rev = CheckLine("theorems", f"{cid} reversed", limit=SUFFICIENT_TOL)
            rng = _rng(seed, rev.label)
            for s, _ in admissible_scenarios(rng, SUFFICIENT[cid][:2], count,
                                             prudent=True, zero_mean=True):
                v = verify_sufficient(s, case)
                rev.tally(v.ordering_gap <= SUFFICIENT_TOL, v.ordering_gap, s)
            lines.append(rev)
    return lines


def lemma_line(seed=0, count=1000):
    line = CheckLine("theorems", "L5_4 lemma", limit=LEMMA_TOL)
    rng = _rng(seed, line.label)
    case = ComparisonCase.for_condition(ConditionId.L5_4)
    for i in range(count):
        s = random_scenario(rng, prudent=True, zero_mean=True, name=f"lemma-{i}")
        v = verify_sufficient(s, case)
        line.tally(v.ordering_holds, -v.margin, s)
    return line


def prudence_ratio_line(seed=0, count=1000):
    line = CheckLine("theorems", "prudence ratios >= 1", limit=RATIO_TOL)
    rng = _rng(seed, line.label)
    for s, sols in admissible_scenarios(rng, [ModelId.BENCHMARK], count,
                                        prudent=True, zero_mean=True):
        e = sols[ModelId.BENCHMARK].e_star
        for m in (ModelId.M4, ModelId.M1):
            r = period1_ratio(s, m, e)
            line.tally(r >= 1 - RATIO_TOL, 1 - r, s)
        for m in (ModelId.M5, ModelId.M2):
            r = period2_ratio(s, m)
            line.tally(r >= 1 - RATIO_TOL, 1 - r, s)
    return line


def quadratic_boundary_line(seed=0, count=1000):
    """Affine marginal utility: the period-1 condition is an equality and e4* = e*."""
    line = CheckLine("theorems", "C5_2 quadratic boundary", limit=BOUNDARY_TOL)
    rng = _rng(seed, line.label)
    for i in range(count):
        s = random_scenario(rng, zero_mean=True, name=f"quadratic-{i}")
        s = s.replace(u=UtilityFunction.quadratic(1.0 / (2.0 * rng.uniform(1.6, 4.0) * s.w1)))
        try:
            value = condition_value(s, ComparisonCase.for_condition(ConditionId.P5_1), {})
            e0 = solve_optimal(s, ModelId.BENCHMARK).e_star
            e4 = solve_optimal(s, ModelId.M4).e_star
        except PossprevError:
            continue
        worst = max(abs(value), abs(e4 - e0))
        line.tally(worst <= BOUNDARY_TOL, worst, s)
    return line


def ambiguity_lines(seed=0, budget=10_000):
    lines = []
    for remark, model in AMBIGUITY.items():
        line = CheckLine("theorems", f"{remark} ambiguity")
        try:
            w = search_ambiguity(prudent_generator, remark, budget=budget,
                                 seed=zlib.crc32(f"{seed}-{remark}".encode()))
        except PossprevError as exc:
            line.tally(False)
            line.note = str(exc)
        else:
            line.tally(True)
            line.note = (f"e*<{model.value}* gap={w.below_gap:.3g}, "
                         f"e*>{model.value}* gap={w.above_gap:.3g}, tried={w.tried}")
        lines.append(line)
    return lines


def theorem_suite(seed=0, count=1000, budget=10_000):
    return (equivalence_lines(seed, count) + sufficient_lines(seed, count)
            + [lemma_line(seed, count), prudence_ratio_line(seed, count),
               quadratic_boundary_line(seed, count)]
            + ambiguity_lines(seed, budget))


SUITES = {
    "jensen": jensen_suite,
    "focs": foc_suite,
    "theorems": theorem_suite,
    "oracle": oracle_suite,
}


def run_suite(name: str, seed: int = 0, count: int | None = None):
    names = list(SUITES) if name == "all" else [name]
    lines = []
    for n in names:
        fn = SUITES[n]
        lines += fn(seed) if count is None else fn(seed, count)
    return lines
