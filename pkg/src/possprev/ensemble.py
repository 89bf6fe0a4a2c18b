"""Seeded random scenario generation for the randomized verification suites.

Draws follow fixed ranges: wealths in [5, 50], loss in (0, 0.8 w2], risk
spreads at most 0.3 min(w1, w2) and, in period 2, at most 0.8 (w2 - l) so
logarithmic and CRRA utilities stay defined.  Every generated scenario carries
a fuzzy number *and* a random variable in both periods, so all nine models
can be solved on it.
"""

from __future__ import annotations

import numpy as np

from .errors import PossprevError
from .fuzzy import FuzzyNumber, WeightingFunction, centered as f_centered
from .models import ModelId, Scenario, solve_optimal
from .preferences import LossProbability, UtilityFunction
from .stochastic import DiscreteRandomVariable, centered as x_centered, discretize_normal


def random_utility(rng, wealth, *, prudent=False):
    families = ["log", "crra", "cara"] + ([] if prudent else ["quadratic"])
    fam = families[rng.integers(len(families))]
    if fam == "log":
        return UtilityFunction.log()
    if fam == "crra":
        eta = rng.uniform(0.3, 4.0)
        if abs(eta - 1.0) < 0.05:
            eta += 0.1
        return UtilityFunction.crra(eta)
    if fam == "cara":
        return UtilityFunction.cara(rng.uniform(0.1, 2.0) / wealth)
    # keeps w + 0.3 w well inside x < 1/(2b)
    return UtilityFunction.quadratic(1.0 / (2.0 * rng.uniform(1.6, 4.0) * wealth))


def random_loss_probability(rng):
    if rng.random() < 0.6:
        return LossProbability.exponential(rng.uniform(0.05, 0.95), rng.uniform(0.05, 1.5))
    return LossProbability.rational(rng.uniform(0.05, 0.95), rng.uniform(0.3, 3.0))


def random_weighting(rng):
    r = rng.random()
    if r < 0.3:
        return WeightingFunction.uniform()
    if r < 0.85:
        return WeightingFunction.power_law(rng.uniform(0.0, 4.0))
    g = np.linspace(0.0, 1.0, int(rng.integers(3, 9)))
    fv = np.sort(rng.uniform(0.0, 1.0, g.size))
    return WeightingFunction.tabulated(np.column_stack([g, fv / np.trapezoid(fv, g)]))


def random_fuzzy(rng, spread, f, *, zero_mean=False):
    r = rng.random()
    c = rng.uniform(-0.2, 0.2) * spread
    if r < 0.45:
        A = FuzzyNumber.triangular(c, rng.uniform(0, spread), rng.uniform(0, spread))
    elif r < 0.85:
        core = rng.uniform(0, 0.3) * spread
        A = FuzzyNumber.trapezoidal(c - core / 2, c + core / 2,
                                    rng.uniform(0, spread * 0.8), rng.uniform(0, spread * 0.8))
    else:
        g = np.linspace(0.0, 1.0, int(rng.integers(3, 12)))
        q1, q2 = rng.uniform(0.5, 2.0, 2)
        left, right = rng.uniform(0, spread, 2)
        A = FuzzyNumber.sampled(np.column_stack([g, c - left * (1 - g) ** q1,
                                                 c + right * (1 - g) ** q2]))
    return f_centered(A, f) if zero_mean else A


def random_variable(rng, spread, *, zero_mean=False):
    if rng.random() < 0.25:
        X = discretize_normal(rng.uniform(-0.2, 0.2) * spread, spread / 3.0,
                              int(rng.integers(3, 8)))
    else:
        n = int(rng.integers(2, 6))
        probs = rng.dirichlet(np.ones(n))
        probs = np.maximum(probs, 1e-3)
        probs /= probs.sum()
        X = DiscreteRandomVariable(np.column_stack([rng.uniform(-spread, spread, n), probs]))
    if zero_mean:
        X = x_centered(X)
    return X


def random_scenario(rng, *, prudent=False, zero_mean=False, spread_scale=None,
                    name="random") -> Scenario:
    """One random scenario.

    ``prudent`` restricts both utilities to families with a positive third
    derivative; ``zero_mean`` centres every background risk.
    ``spread_scale`` optionally fixes ``(s1, s2)`` multipliers in [0, 1] of
    the maximal period spreads instead of drawing them.
    """
    w1, w2 = rng.uniform(5.0, 50.0, 2)
    l = rng.uniform(0.05, 0.8) * w2
    cap = 0.3 * min(w1, w2)
    s1, s2 = spread_scale if spread_scale is not None else rng.uniform(0.0, 1.0, 2)
    spread1 = s1 * cap
    spread2 = s2 * min(cap, 0.8 * (w2 - l))
    f = random_weighting(rng)
    return Scenario(
        w1, w2, l,
        random_utility(rng, w1, prudent=prudent),
        random_utility(rng, w2, prudent=prudent),
        random_loss_probability(rng), f,
        risk1=(random_fuzzy(rng, spread1, f, zero_mean=zero_mean),
               random_variable(rng, spread1, zero_mean=zero_mean)),
        risk2=(random_fuzzy(rng, spread2, f, zero_mean=zero_mean),
               random_variable(rng, spread2, zero_mean=zero_mean)),
        name=name)


def admissible_scenarios(rng, models, count, *, max_tries=None, **kw):
    """Yield ``count`` scenarios on which every model in ``models`` has an interior optimum.

    Each yielded item is ``(scenario, {model: SolveResult})``.
    """
    models = [ModelId.parse(m) for m in models]
    max_tries = max_tries or 200 * count
    made = tries = 0
    while made < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError(f"only {made} admissible scenarios in {max_tries} draws")
        s = random_scenario(rng, name=f"draw-{tries}", **kw)
        try:
            sols = {m: solve_optimal(s, m) for m in models}
        except PossprevError:
            continue
        if all(r.interior for r in sols.values()):
            made += 1
            yield s, sols
