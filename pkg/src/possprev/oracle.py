"""Brute-force reference computations.

Nothing here calls the quadrature rules or the solver of the main path:
level sets and weights are re-derived from the raw parameters, integrals use
the midpoint rule and optima come from a grid scan of total utility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError, DomainError, ModelMismatchError
from .fuzzy import FuzzyNumber, WeightingFunction
from .models import FUZZY, REQUIRED, ModelId, Scenario
from .stochastic import DiscreteRandomVariable


@dataclass
class OracleConfig:
    gamma_grid_size: int = 100_000
    effort_grid_step: float = 1e-4
    tolerance_report: list = field(default_factory=list)

    def __post_init__(self):
        if int(self.gamma_grid_size) < 10_000:
            raise ConstructionError("gamma_grid_size must be >= 1e4")
        if not 0 < self.effort_grid_step <= 1e-4:
            raise ConstructionError("effort_grid_step must lie in (0, 1e-4]")

    def record(self, main: float, oracle: float) -> float:
        gap = abs(main - oracle)
        self.tolerance_report.append(gap)
        return gap


def _endpoints(A: FuzzyNumber, g: np.ndarray):
    if A.family == "triangular":
        c, left, right = A.params
        lo, hi = c - left + left * g, c + right - right * g
    elif A.family == "trapezoidal":
        cl, cr, left, right = A.params
        lo, hi = cl - left + left * g, cr + right - right * g
    else:
        rows = A.grid
        j = np.clip(np.searchsorted(rows[:, 0], g, side="right") - 1, 0, len(rows) - 2)
        t = (g - rows[j, 0]) / (rows[j + 1, 0] - rows[j, 0])
        lo = rows[j, 1] + t * (rows[j + 1, 1] - rows[j, 1])
        hi = rows[j, 2] + t * (rows[j + 1, 2] - rows[j, 2])
    return lo + A.shift, hi + A.shift


def _cumulative(f: WeightingFunction, g: np.ndarray):
    # F(g) = int_0^g f; exact for every supported family
    if f.family == "uniform":
        return g.copy()
    if f.family == "power":
        return np.power(g, f.exponent + 1.0)
    rows = f.grid
    x, y = rows[:, 0], rows[:, 1]
    steps = np.concatenate([[0.0], np.cumsum(np.diff(x) * (y[1:] + y[:-1]) / 2.0)])
    j = np.clip(np.searchsorted(x, g, side="right") - 1, 0, len(x) - 2)
    dx = g - x[j]
    slope = (y[j + 1] - y[j]) / (x[j + 1] - x[j])
    return steps[j] + y[j] * dx + slope * dx * dx / 2.0


def _midpoint_atoms(A, f, n):
    # midpoint values of the integrand, exact mass of f on each cell
    edges = np.arange(n + 1) / n
    g = (edges[:-1] + edges[1:]) / 2.0
    lo, hi = _endpoints(A, g)
    mass = np.diff(_cumulative(f, edges))
    w = mass / (2.0 * mass.sum())
    return np.concatenate([lo, hi]), np.concatenate([w, w])


def _apply(u, x):
    dom = getattr(u, "domain", None)
    if dom is not None and not np.all(dom.contains(x)):
        raise DomainError("oracle integrand evaluated outside its validity interval")
    return np.asarray(u(x), dtype=float)


def oracle_expected_utility(A: FuzzyNumber, f: WeightingFunction, u,
                            cfg: OracleConfig | None = None) -> float:
    """Midpoint-rule ``E_f(u(A))`` on ``cfg.gamma_grid_size`` cells."""
    cfg = cfg or OracleConfig()
    x, w = _midpoint_atoms(A, f, int(cfg.gamma_grid_size))
    return float(np.sum(w * _apply(u, x)))


def oracle_expected_value(A: FuzzyNumber, f: WeightingFunction,
                          cfg: OracleConfig | None = None) -> float:
    return oracle_expected_utility(A, f, lambda x: x, cfg)


def oracle_discrete_expectation(X: DiscreteRandomVariable, u) -> float:
    """Exhaustive sum over the outcomes, one at a time."""
    total = 0.0
    for x, prob in X.outcomes:
        total += prob * float(u(x))
    return total


def _risk_atoms(s, m, period, cfg):
    kind = REQUIRED[m][period - 1]
    if kind is None:
        return np.zeros(1), np.ones(1)
    r = s.risk(period, kind)
    if r is None:
        raise ModelMismatchError(f"model {m.value} requires a period-{period} {kind} risk")
    if kind == FUZZY:
        return _midpoint_atoms(r, s.f, int(cfg.gamma_grid_size))
    return np.array([x for x, _ in r.outcomes]), np.array([q for _, q in r.outcomes])


class _OracleModel:
    def __init__(self, s: Scenario, m: ModelId, cfg: OracleConfig):
        self.s = s
        self.x1, self.w1 = _risk_atoms(s, m, 1, cfg)
        x2, w2 = _risk_atoms(s, m, 2, cfg)
        self.loss = float(np.sum(w2 * _apply(s.v, s.w2 - s.l + x2)))
        self.sure = float(np.sum(w2 * _apply(s.v, s.w2 + x2)))
        floor = s.u.domain.lo
        ub = s.w1
        if math.isfinite(floor):
            ub = min(ub, s.w1 + float(self.x1.min()) - floor - 1e-6)
        self.ub = ub

    def value(self, e):
        s = self.s
        out = np.empty(len(e))
        for i, ei in enumerate(e):
            period1 = float(np.sum(self.w1 * _apply(s.u, s.w1 - ei + self.x1)))
            pe = s.p.p0 * (math.exp(-s.p.k * ei) if s.p.family == "exp_loss"
                           else (1.0 + ei) ** -s.p.k)
            out[i] = period1 + pe * self.loss + (1.0 - pe) * self.sure
        return out


def oracle_total_utility(s: Scenario, m: ModelId, e, cfg: OracleConfig | None = None):
    cfg = cfg or OracleConfig()
    return _OracleModel(s, ModelId.parse(m), cfg).value(np.atleast_1d(np.asarray(e, float)))


def oracle_argmax(s: Scenario, m: ModelId, cfg: OracleConfig | None = None,
                  points: int = 101) -> float:
    """Grid point ``k * effort_grid_step`` maximising total utility.

    The scan starts on ``points`` evenly spaced efforts and repeatedly rescans
    the two cells around the best point more finely; concavity guarantees the
    maximiser stays inside.  The last pass is the full step grid.
    """
    cfg = cfg or OracleConfig()
    om = _OracleModel(s, ModelId.parse(m), cfg)
    step = cfg.effort_grid_step
    n_max = int(math.floor(om.ub / step))
    lo, hi = 0, n_max
    while True:
        if hi - lo <= 2 * points:
            ks = np.arange(lo, hi + 1)
            vals = om.value(ks * step)
            return float(ks[int(np.argmax(vals))] * step)
        ks = np.unique(np.linspace(lo, hi, points).round().astype(np.int64))
        vals = om.value(ks * step)
        i = int(np.argmax(vals))
        lo, hi = int(ks[max(i - 1, 0)]), int(ks[min(i + 1, len(ks) - 1)])
