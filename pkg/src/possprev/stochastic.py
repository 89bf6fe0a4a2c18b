"""Finite-support random variables and probabilistic expected utility."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .errors import ConstructionError, DomainError

PROB_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DiscreteRandomVariable:
    """Random variable with finitely many outcomes."""

    values: np.ndarray
    probs: np.ndarray

    def __init__(self, outcomes):
        pairs = np.array(outcomes, dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] < 1:
            raise ConstructionError("random variable needs (value, probability) pairs")
        values, probs = pairs[:, 0].copy(), pairs[:, 1].copy()
        if not np.all(np.isfinite(values)):
            raise ConstructionError("outcome values must be finite")
        if np.any(probs <= 0) or np.any(probs > 1):
            raise ConstructionError("probabilities must lie in (0, 1]")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise ConstructionError(f"probabilities sum to {probs.sum()!r}, not 1")
        values.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point_mass(cls, value=0.0):
        return cls([(value, 1.0)])

    @property
    def outcomes(self):
        return list(zip(self.values.tolist(), self.probs.tolist()))

    @property
    def support(self) -> tuple[float, float]:
        return float(self.values.min()), float(self.values.max())

    def shifted(self, offset) -> "DiscreteRandomVariable":
        return DiscreteRandomVariable(np.column_stack([self.values + offset, self.probs]))

    def __repr__(self):
        body = ", ".join(f"({x:g}, {p:g})" for x, p in self.outcomes)
        return f"DiscreteRandomVariable([{body}])"


def expected_value(X: DiscreteRandomVariable) -> float:
    return float(X.probs @ X.values)


def probabilistic_expected_utility(X: DiscreteRandomVariable, u) -> float:
    """``M(u(X)) = sum_i p_i u(x_i)``."""
    dom = getattr(u, "domain", None)
    if dom is not None and not np.all(dom.contains(X.values)):
        bad = X.values[~dom.contains(X.values)][0]
        raise DomainError(f"outcome {bad!r} outside validity interval {dom}")
    return float(X.probs @ np.asarray(u(X.values), dtype=float))


def discretize_normal(mean: float, stdev: float, n: int = 7) -> DiscreteRandomVariable:
    """Gauss-Hermite discretisation of N(mean, stdev**2) on ``n`` points.

    The rule matches every moment up to order ``2n - 1``.
    """
    if not (math.isfinite(mean) and math.isfinite(stdev)) or stdev <= 0:
        raise ConstructionError(f"normal needs finite mean and stdev > 0, got {mean!r}, {stdev!r}")
    if int(n) != n or n < 3:
        raise ConstructionError(f"normal discretisation needs n >= 3 nodes, got {n!r}")
    x, w = hermegauss(int(n))
    w = w / w.sum()
    return DiscreteRandomVariable(np.column_stack([mean + stdev * x, w]))


def centered(X: DiscreteRandomVariable) -> DiscreteRandomVariable:
    """Shift ``X`` to zero mean."""
    return X.shifted(-expected_value(X))
