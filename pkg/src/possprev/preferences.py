"""Utility families and loss-probability families with closed-form derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, DomainError
from .fuzzy import Interval, ScalarFunction

# integer codes shared with the compiled kernels
UTILITY_CODES = {"log": 0, "crra": 1, "cara": 2, "quadratic": 3}
LOSS_CODES = {"exp_loss": 0, "rational_loss": 1}

_PROBES = 257


@dataclass(frozen=True)
class UtilityFunction:
    """Increasing, concave utility with derivatives up to order three.

    ``param`` is eta for CRRA, alpha for CARA and b for quadratic utility
    ``x - b x**2`` (valid for ``x < 1/(2b)``); log utility ignores it.
    """

    family: str
    param: float = 0.0

    def __post_init__(self):
        if self.family not in UTILITY_CODES:
            raise ConstructionError(f"unknown utility family {self.family!r}")
        p = float(self.param)
        object.__setattr__(self, "param", p)
        if self.family == "crra" and not (p > 0 and p != 1 and math.isfinite(p)):
            raise ConstructionError(f"CRRA needs eta > 0, eta != 1; got {p!r}")
        if self.family in ("cara", "quadratic") and not (p > 0 and math.isfinite(p)):
            raise ConstructionError(f"{self.family} parameter must be > 0; got {p!r}")
        self._check_signs()

    @classmethod
    def log(cls):
        return cls("log")

    @classmethod
    def crra(cls, eta):
        return cls("crra", eta)

    @classmethod
    def cara(cls, alpha):
        return cls("cara", alpha)

    @classmethod
    def quadratic(cls, b):
        return cls("quadratic", b)

    @property
    def code(self) -> int:
        return UTILITY_CODES[self.family]

    @property
    def domain(self) -> Interval:
        if self.family in ("log", "crra"):
            return Interval(0.0, math.inf)
        if self.family == "quadratic":
            return Interval(-math.inf, 1.0 / (2.0 * self.param))
        return Interval()

    @property
    def prudent(self) -> bool:
        """True when ``u''' > 0`` on the whole validity interval."""
        return self.family != "quadratic"

    def _check_signs(self):
        lo, hi = self.domain.lo, self.domain.hi
        if not (math.isfinite(lo) or math.isfinite(hi)):
            lo, hi = -20.0, 20.0
        lo = lo if math.isfinite(lo) else hi - 200.0
        hi = hi if math.isfinite(hi) else lo + 200.0
        x = np.linspace(lo, hi, _PROBES)[1:-1]
        d1, d2 = self.raw(1, x), self.raw(2, x)
        # CARA underflows to 0 far to the right; only the sign is meaningful
        if np.any(d1 < 0) or np.any(d2 > 0):
            raise ConstructionError(f"{self!r} violates u' > 0, u'' < 0")

    def raw(self, order: int, x):
        """Evaluate the ``order``-th derivative without domain checks."""
        x = np.asarray(x, dtype=float)
        fam, p = self.family, self.param
        if fam == "log":
            if order == 0:
                return np.log(x)
            return (-1.0) ** (order - 1) * math.factorial(order - 1) / x ** order
        if fam == "crra":
            if order == 0:
                return x ** (1.0 - p) / (1.0 - p)
            if order == 1:
                return x ** -p
            if order == 2:
                return -p * x ** (-p - 1.0)
            return p * (p + 1.0) * x ** (-p - 2.0)
        if fam == "cara":
            ex = np.exp(-p * x)
            return (-ex / p, ex, -p * ex, p * p * ex)[order]
        if order == 0:
            return x - p * x * x
        if order == 1:
            return 1.0 - 2.0 * p * x
        if order == 2:
            return np.full_like(x, -2.0 * p)
        return np.zeros_like(x)

    def eval(self, order: int, x):
        if order not in (0, 1, 2, 3):
            raise ValueError(f"derivative order must be 0..3, got {order!r}")
        x = np.asarray(x, dtype=float)
        ok = self.domain.contains(x)
        if not np.all(ok):
            bad = np.atleast_1d(x)[~np.atleast_1d(ok)][0]
            raise DomainError(f"{self.family} utility undefined at {bad!r} "
                              f"(validity interval {self.domain})")
        out = self.raw(order, x)
        return out if np.ndim(out) else float(out)

    def __call__(self, x):
        return self.eval(0, x)

    def derivative(self, order: int = 1) -> ScalarFunction:
        """The ``order``-th derivative as a domain-checked :class:`ScalarFunction`."""
        derivs = tuple((lambda x, k=k: self.raw(k, x)) for k in range(order + 1, 4))
        return ScalarFunction(lambda x: self.raw(order, x), self.domain, derivs,
                              f"{self.family}^({order})")

    def __repr__(self):
        if self.family == "log":
            return "UtilityFunction.log()"
        return f"UtilityFunction.{self.family}({self.param:g})"


def eval_utility(u: UtilityFunction, order: int, x):
    return u.eval(order, x)


@dataclass(frozen=True)
class LossProbability:
    """Decreasing, convex probability of loss ``p(e)`` for effort ``e >= 0``.

    ``exp_loss``: ``p0 * exp(-k e)``; ``rational_loss``: ``p0 / (1 + e)**k``.
    """

    family: str
    p0: float
    k: float

    def __post_init__(self):
        if self.family not in LOSS_CODES:
            raise ConstructionError(f"unknown loss-probability family {self.family!r}")
        p0, k = float(self.p0), float(self.k)
        if not 0.0 < p0 < 1.0:
            raise ConstructionError(f"p0 must lie in (0, 1), got {p0!r}")
        if not (k > 0 and math.isfinite(k)):
            raise ConstructionError(f"k must be > 0, got {k!r}")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "k", k)

    @classmethod
    def exponential(cls, p0, k):
        return cls("exp_loss", p0, k)

    @classmethod
    def rational(cls, p0, k):
        return cls("rational_loss", p0, k)

    @property
    def code(self) -> int:
        return LOSS_CODES[self.family]

    def raw(self, order: int, e):
        e = np.asarray(e, dtype=float)
        p0, k = self.p0, self.k
        if self.family == "exp_loss":
            return p0 * (-k) ** order * np.exp(-k * e)
        coef = (1.0, -k, k * (k + 1.0))[order]
        return p0 * coef * (1.0 + e) ** (-k - order)

    def eval(self, order: int, e):
        if order not in (0, 1, 2):
            raise ValueError(f"derivative order must be 0..2, got {order!r}")
        e = np.asarray(e, dtype=float)
        if np.any(e < 0) or np.any(np.isnan(e)):
            raise DomainError(f"effort must be >= 0, got {e.min()!r}")
        out = self.raw(order, e)
        return out if np.ndim(out) else float(out)

    def __call__(self, e):
        return self.eval(0, e)

    def __repr__(self):
        name = "exponential" if self.family == "exp_loss" else "rational"
        return f"LossProbability.{name}({self.p0:g}, {self.k:g})"


def eval_loss_probability(p: LossProbability, order: int, e):
    return p.eval(order, e)
