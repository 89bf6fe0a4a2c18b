"""Two-period self-protection models with and without background risk.

Every model has total utility

    V(e) = E1[u(w1 - e + R1)] + p(e) E2[v(w2 - l + R2)] + (1 - p(e)) E2[v(w2 + R2)]

where ``E1``/``E2`` is the identity (no risk), the probabilistic mean ``M``
(random variable) or the possibilistic mean ``E_f`` (fuzzy number) of the
period's background risk, as laid out below:

=========  ========  ========
model      period 1  period 2
=========  ========  ========
benchmark  --        --
m1         random    --
m2         --        random
m3         random    random
m4         fuzzy     --
m5         --        fuzzy
m6         fuzzy     fuzzy
m7         random    fuzzy
m8         fuzzy     random
=========  ========  ========

Both kinds of risk reduce to weighted atoms (see :func:`possprev.fuzzy.atoms`),
so one set of formulas serves all nine models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .errors import ConstructionError, DomainError, ModelMismatchError, SolverError
from .fuzzy import FuzzyNumber, WeightingFunction, atoms
from .preferences import LossProbability, UtilityFunction
from .stochastic import DiscreteRandomVariable

FUZZY = "fuzzy"
RANDOM = "random"

DOMAIN_MARGIN = 1e-6
XTOL = 1e-13
MAXITER = 400


class ModelId(str, Enum):
    BENCHMARK = "benchmark"
    M1 = "m1"
    M2 = "m2"
    M3 = "m3"
    M4 = "m4"
    M5 = "m5"
    M6 = "m6"
    M7 = "m7"
    M8 = "m8"

    @classmethod
    def parse(cls, text) -> "ModelId":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        if key in ("0", "b", "e", "bench"):
            key = "benchmark"
        elif key.isdigit():
            key = "m" + key
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown model {text!r}") from None

    @property
    def requires(self) -> tuple:
        return REQUIRED[self]

    def __str__(self):
        return self.value


REQUIRED = {
    ModelId.BENCHMARK: (None, None),
    ModelId.M1: (RANDOM, None),
    ModelId.M2: (None, RANDOM),
    ModelId.M3: (RANDOM, RANDOM),
    ModelId.M4: (FUZZY, None),
    ModelId.M5: (None, FUZZY),
    ModelId.M6: (FUZZY, FUZZY),
    ModelId.M7: (RANDOM, FUZZY),
    ModelId.M8: (FUZZY, RANDOM),
}

ALL_MODELS = tuple(ModelId)


class Corner(str, Enum):
    INTERIOR = "interior"
    AT_ZERO = "at_zero"
    AT_UPPER_BOUND = "at_upper_bound"

    def __str__(self):
        return self.value


def _kind(risk):
    if isinstance(risk, FuzzyNumber):
        return FUZZY
    if isinstance(risk, DiscreteRandomVariable):
        return RANDOM
    raise ConstructionError(f"background risk must be a FuzzyNumber or "
                            f"DiscreteRandomVariable, got {type(risk).__name__}")


def _slot(risk, period):
    """Normalise a period's risk into ``{kind: risk}``."""
    if risk is None:
        return {}
    items = risk if isinstance(risk, (tuple, list)) else (risk,)
    out = {}
    for r in items:
        k = _kind(r)
        if k in out:
            raise ConstructionError(f"period {period} holds two {k} risks")
        out[k] = r
    return out


@dataclass(frozen=True, eq=False)
class Scenario:
    """A complete model instance.

    ``risk1``/``risk2`` hold the period's background risk: ``None``, a fuzzy
    number, a random variable, or a pair of one of each so that a single
    scenario can feed every model in the table.
    """

    w1: float
    w2: float
    l: float
    u: UtilityFunction
    v: UtilityFunction
    p: LossProbability
    f: WeightingFunction = field(default_factory=WeightingFunction.uniform)
    risk1: object = None
    risk2: object = None
    name: str = "scenario"

    def __post_init__(self):
        for key in ("w1", "w2", "l"):
            val = float(getattr(self, key))
            if not math.isfinite(val):
                raise ConstructionError(f"{key} must be finite")
            object.__setattr__(self, key, val)
        if self.l <= 0:
            raise ConstructionError(f"loss l must be > 0, got {self.l!r}")
        object.__setattr__(self, "_slots", (_slot(self.risk1, 1), _slot(self.risk2, 2)))
        object.__setattr__(self, "_ctx", {})

    def risk(self, period: int, kind: str):
        return self._slots[period - 1].get(kind)

    def supports(self, m: ModelId) -> bool:
        m = ModelId.parse(m)
        return all(k is None or self.risk(i + 1, k) is not None
                   for i, k in enumerate(REQUIRED[m]))

    def supported_models(self) -> list:
        return [m for m in ALL_MODELS if self.supports(m)]

    def replace(self, **changes) -> "Scenario":
        kw = {k: getattr(self, k) for k in
              ("w1", "w2", "l", "u", "v", "p", "f", "risk1", "risk2", "name")}
        kw.update(changes)
        return Scenario(**kw)

    def __repr__(self):
        return (f"Scenario({self.name!r}, w1={self.w1:g}, w2={self.w2:g}, l={self.l:g}, "
                f"u={self.u!r}, v={self.v!r}, p={self.p!r}, f={self.f!r}, "
                f"risk1={self.risk1!r}, risk2={self.risk2!r})")


_NO_RISK = (np.zeros(1), np.ones(1))


@dataclass(frozen=True)
class _Context:
    xs1: np.ndarray
    ws1: np.ndarray
    lo1: float
    xs2: np.ndarray
    ws2: np.ndarray
    loss_term: float     # E2[v(w2 - l + R2)]
    sure_term: float     # E2[v(w2 + R2)]
    upper_bound: float

    @property
    def delta2(self) -> float:
        return self.loss_term - self.sure_term


def _period_atoms(s: Scenario, m: ModelId, period: int):
    kind = REQUIRED[m][period - 1]
    if kind is None:
        return _NO_RISK[0], _NO_RISK[1], 0.0, 0.0
    r = s.risk(period, kind)
    if r is None:
        raise ModelMismatchError(
            f"model {m.value} requires a period-{period} {kind} risk "
            f"(scenario {s.name!r})")
    if kind == FUZZY:
        xs, ws = atoms(r, s.f)
    else:
        xs, ws = r.values, r.probs
    lo, hi = r.support
    return np.ascontiguousarray(xs, float), np.ascontiguousarray(ws, float), lo, hi


def upper_bound(s: Scenario, m: ModelId) -> float:
    """Largest admissible effort for model ``m``."""
    return context(s, m).upper_bound


def context(s: Scenario, m: ModelId) -> _Context:
    """Validate ``s`` for ``m`` and precompute the effort-independent pieces."""
    m = ModelId.parse(m)
    cached = s._ctx.get(m)
    if cached is not None:
        return cached
    xs1, ws1, lo1, hi1 = _period_atoms(s, m, 1)
    xs2, ws2, lo2, hi2 = _period_atoms(s, m, 2)

    ub = s.w1
    floor = s.u.domain.lo
    if math.isfinite(floor):
        ub = min(ub, s.w1 + lo1 - floor - DOMAIN_MARGIN)
    if not ub > 0:
        raise DomainError(f"scenario {s.name!r}: w1 + min(risk1) = {s.w1 + lo1:g} leaves "
                          f"no admissible effort inside u's validity interval {s.u.domain}")
    if not s.w1 + hi1 < s.u.domain.hi:
        raise DomainError(f"scenario {s.name!r}: w1 + max(risk1) = {s.w1 + hi1:g} "
                          f"outside u's validity interval {s.u.domain}")
    vdom = s.v.domain
    if not (s.w2 - s.l + lo2 > vdom.lo and s.w2 + hi2 < vdom.hi):
        raise DomainError(f"scenario {s.name!r}: period-2 wealth range "
                          f"[{s.w2 - s.l + lo2:g}, {s.w2 + hi2:g}] outside v's "
                          f"validity interval {vdom}")
    ctx = _Context(xs1, ws1, lo1, xs2, ws2,
                   float(ws2 @ s.v.raw(0, s.w2 - s.l + xs2)),
                   float(ws2 @ s.v.raw(0, s.w2 + xs2)), float(ub))
    s._ctx[m] = ctx
    return ctx


def _efforts(ctx, e):
    e = np.asarray(e, dtype=float)
    if np.any(e < 0) or np.any(e > ctx.upper_bound) or np.any(np.isnan(e)):
        raise DomainError(f"effort outside [0, {ctx.upper_bound:g}]")
    return e


def _period1(s, ctx, order, e):
    wealth = (s.w1 - e)[..., None] + ctx.xs1
    return s.u.raw(order, wealth) @ ctx.ws1


def total_utility(s: Scenario, m: ModelId, e):
    """``V_m(e)``; vectorised over ``e``."""
    ctx = context(s, m)
    e = _efforts(ctx, e)
    pe = s.p.raw(0, e)
    out = _period1(s, ctx, 0, e) + pe * ctx.loss_term + (1.0 - pe) * ctx.sure_term
    return out if np.ndim(out) else float(out)


def marginal_utility(s: Scenario, m: ModelId, e):
    """Closed-form ``V_m'(e) = -E1[u'(w1 - e + R1)] + p'(e) (E2[v(w2-l+R2)] - E2[v(w2+R2)])``."""
    ctx = context(s, m)
    e = _efforts(ctx, e)
    out = -_period1(s, ctx, 1, e) + s.p.raw(1, e) * ctx.delta2
    return out if np.ndim(out) else float(out)


def second_derivative(s: Scenario, m: ModelId, e):
    ctx = context(s, m)
    e = _efforts(ctx, e)
    out = _period1(s, ctx, 2, e) + s.p.raw(2, e) * ctx.delta2
    return out if np.ndim(out) else float(out)


def foc_sides(s: Scenario, m: ModelId, e) -> tuple[float, float]:
    """Both sides of the first-order condition ``E1[u'(w1-e+R1)] = p'(e) * delta2``."""
    ctx = context(s, m)
    e = _efforts(ctx, e)
    return float(_period1(s, ctx, 1, e)), float(s.p.raw(1, e) * ctx.delta2)


@dataclass(frozen=True)
class SolveResult:
    model: ModelId
    e_star: float
    foc_residual: float
    corner: Corner
    v_prime_at_zero: float
    upper_bound: float
    iterations: int = 0
    backend: str = ""

    @property
    def interior(self) -> bool:
        return self.corner is Corner.INTERIOR


def solve_optimal(s: Scenario, m: ModelId, *, xtol: float = XTOL,
                  backend=None) -> SolveResult:
    """Maximise ``V_m`` over ``[0, upper_bound]``.

    Corners are reported, not hidden: ``V'(0) <= 0`` gives ``e* = 0`` and
    ``V'(upper_bound) >= 0`` gives ``e* = upper_bound``.  Otherwise the root of
    the strictly decreasing ``V'`` is bracketed and bisected to width ``xtol``.
    """
    m = ModelId.parse(m)
    ctx = context(s, m)
    ub = ctx.upper_bound
    k = backend if backend is not None else kernels.impl
    name = "python" if k is kernels._pykernels else "cython"
    d0 = marginal_utility(s, m, 0.0)
    dub = marginal_utility(s, m, ub)
    if math.isnan(d0) or math.isnan(dub):
        raise SolverError(f"marginal utility is NaN at the effort bounds (scenario {s.name!r})")
    if d0 <= 0:
        return SolveResult(m, 0.0, d0, Corner.AT_ZERO, d0, ub, 0, name)
    if dub >= 0:
        return SolveResult(m, ub, dub, Corner.AT_UPPER_BOUND, d0, ub, 0, name)
    e, it = k.bisect_effort(s.u.code, s.u.param, ctx.xs1, ctx.ws1, s.w1,
                            s.p.code, s.p.p0, s.p.k, ctx.delta2, 0.0, ub, xtol, MAXITER)
    if it >= MAXITER:
        raise SolverError(f"bisection did not converge in {MAXITER} steps (scenario {s.name!r})")
    return SolveResult(m, float(e), marginal_utility(s, m, e), Corner.INTERIOR, d0, ub,
                       int(it), name)


def solve_many(s: Scenario, models=None) -> dict:
    """Solve every model in ``models`` (default: all the scenario supports)."""
    models = s.supported_models() if models is None else [ModelId.parse(m) for m in models]
    return {m: solve_optimal(s, m) for m in models}
