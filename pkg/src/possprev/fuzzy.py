"""Fuzzy numbers, weighting functions and possibilistic expectations.

A fuzzy number is handled exclusively through its level sets
``[a1(gamma), a2(gamma)]``. The possibilistic expected utility of ``u(A)``
under a weighting function ``f`` is

    E_f(u(A)) = 1/2 * int_0^1 [u(a1(g)) + u(a2(g))] f(g) dg

and the expected value is the same integral with ``u`` the identity.

Quadrature
----------
Parametric inputs (triangular/trapezoidal numbers with uniform or power-law
weights) use a 64-node Gauss rule whose weight function absorbs ``f``:
Gauss-Legendre for the uniform weight and Gauss-Jacobi for
``f(g) = (k+1) g**k``.  Tabulated weights or sampled level sets fall back to
the composite trapezoid rule on the union of their native grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import ConstructionError, DomainError

QUAD_NODES = 64
PANEL_NODES = 12
NORMALITY_TOL = 1e-8
RENORMALIZE_TOL = 1e-4
NESTING_SLACK = 1e-12


@dataclass(frozen=True)
class Interval:
    """Open validity interval ``(lo, hi)``."""

    lo: float = -math.inf
    hi: float = math.inf

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return (x > self.lo) & (x < self.hi)

    def __str__(self):
        return f"({self.lo:g}, {self.hi:g})"


class ScalarFunction:
    """A real function with a validity interval and optional derivatives.

    Evaluating outside ``domain`` raises :class:`DomainError` instead of
    silently returning NaN.
    """

    def __init__(self, func: Callable, domain: Interval | None = None,
                 derivatives: tuple = (), name: str | None = None):
        self.func = func
        self.domain = domain if domain is not None else Interval()
        self.derivatives = tuple(derivatives)
        self.name = name or getattr(func, "__name__", "f")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        ok = self.domain.contains(x)
        if not np.all(ok):
            bad = np.atleast_1d(x)[~np.atleast_1d(ok)][0]
            raise DomainError(f"{self.name} evaluated at {bad!r}, outside {self.domain}")
        out = np.asarray(self.func(x), dtype=float)
        if np.isnan(out).any():
            raise DomainError(f"{self.name} returned NaN")
        return out if out.ndim else float(out)

    def derivative(self, order: int = 1) -> "ScalarFunction":
        if order == 0:
            return self
        if order > len(self.derivatives):
            raise ValueError(f"{self.name} has no derivative of order {order}")
        return ScalarFunction(self.derivatives[order - 1], self.domain,
                              self.derivatives[order:], f"{self.name}^({order})")

    def __repr__(self):
        return f"ScalarFunction({self.name}, domain={self.domain})"


identity = ScalarFunction(lambda x: x, derivatives=(np.ones_like,), name="identity")


def _check_grid(g, what):
    if g.size < 2 or g[0] != 0.0 or g[-1] != 1.0 or np.any(np.diff(g) <= 0):
        raise ConstructionError(
            f"{what} gamma grid must be strictly increasing from 0 to 1")


@dataclass(frozen=True, eq=False)
class FuzzyNumber:
    """Fuzzy number given by its level-set endpoints, plus a crisp shift.

    Use the constructors :meth:`triangular`, :meth:`trapezoidal`,
    :meth:`sampled` and :meth:`crisp` rather than the raw fields.
    """

    family: str
    params: tuple = ()
    shift: float = 0.0
    grid: np.ndarray | None = None

    @classmethod
    def triangular(cls, center, left, right, shift=0.0):
        center, left, right = float(center), float(left), float(right)
        if not all(map(math.isfinite, (center, left, right, shift))):
            raise ConstructionError("triangular parameters must be finite")
        if left < 0 or right < 0:
            raise ConstructionError("triangular spreads must be non-negative")
        return cls("triangular", (center, left, right), float(shift))

    @classmethod
    def trapezoidal(cls, core_left, core_right, left, right, shift=0.0):
        vals = tuple(float(v) for v in (core_left, core_right, left, right))
        if not all(map(math.isfinite, vals + (shift,))):
            raise ConstructionError("trapezoidal parameters must be finite")
        if vals[0] > vals[1]:
            raise ConstructionError("trapezoidal core must satisfy core_left <= core_right")
        if vals[2] < 0 or vals[3] < 0:
            raise ConstructionError("trapezoidal spreads must be non-negative")
        return cls("trapezoidal", vals, float(shift))

    @classmethod
    def sampled(cls, rows, shift=0.0):
        """Level sets tabulated as ``(gamma, a1, a2)`` rows, interpolated linearly."""
        grid = np.array(rows, dtype=float)
        if grid.ndim != 2 or grid.shape[1] != 3 or grid.shape[0] < 3:
            raise ConstructionError("sampled fuzzy number needs >= 3 rows of (gamma, a1, a2)")
        if not np.all(np.isfinite(grid)):
            raise ConstructionError("sampled fuzzy number has non-finite entries")
        _check_grid(grid[:, 0], "sampled fuzzy number")
        a1, a2 = grid[:, 1], grid[:, 2]
        if np.any(np.diff(a1) < -NESTING_SLACK) or np.any(np.diff(a2) > NESTING_SLACK):
            raise ConstructionError("sampled level sets are not nested "
                                    "(a1 must be non-decreasing, a2 non-increasing)")
        if np.any(a1 > a2 + NESTING_SLACK):
            raise ConstructionError("sampled level sets need a1 <= a2")
        grid.setflags(write=False)
        return cls("sampled", (), float(shift), grid)

    @classmethod
    def crisp(cls, value=0.0):
        return cls.triangular(value, 0.0, 0.0)

    def shifted(self, offset) -> "FuzzyNumber":
        return FuzzyNumber(self.family, self.params, self.shift + float(offset), self.grid)

    @property
    def gridded(self) -> bool:
        return self.family == "sampled"

    @property
    def is_crisp(self) -> bool:
        lo, hi = self.support
        return lo == hi

    @property
    def support(self) -> tuple[float, float]:
        a1, a2 = self.endpoints(np.array([0.0]))
        return float(a1[0]), float(a2[0])

    def endpoints(self, gamma):
        """Vectorised ``(a1(gamma), a2(gamma))``, shift included."""
        g = np.asarray(gamma, dtype=float)
        if self.family == "triangular":
            c, lft, rgt = self.params
            a1 = c - (1.0 - g) * lft
            a2 = c + (1.0 - g) * rgt
        elif self.family == "trapezoidal":
            cl, cr, lft, rgt = self.params
            a1 = cl - (1.0 - g) * lft
            a2 = cr + (1.0 - g) * rgt
        else:
            a1 = np.interp(g, self.grid[:, 0], self.grid[:, 1])
            a2 = np.interp(g, self.grid[:, 0], self.grid[:, 2])
        return a1 + self.shift, a2 + self.shift

    def __repr__(self):
        if self.gridded:
            body = f"{len(self.grid)} rows"
        else:
            body = ", ".join(f"{p:g}" for p in self.params)
        tail = f", shift={self.shift:g}" if self.shift else ""
        return f"FuzzyNumber.{self.family}({body}{tail})"


def level_set(A: FuzzyNumber, gamma: float) -> tuple[float, float]:
    """Return the ``gamma``-cut ``(a1, a2)`` of ``A``."""
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"level gamma={gamma!r} outside [0, 1]")
    a1, a2 = A.endpoints(gamma)
    return float(a1), float(a2)


@dataclass(frozen=True, eq=False)
class WeightingFunction:
    """Non-negative, non-decreasing density on [0, 1] integrating to one."""

    family: str
    exponent: float = 0.0
    grid: np.ndarray | None = None

    @classmethod
    def uniform(cls):
        return cls("uniform", 0.0)

    @classmethod
    def power_law(cls, k):
        k = float(k)
        if not (math.isfinite(k) and k >= 0):
            raise ConstructionError(f"power-law exponent must be >= 0, got {k!r}")
        if k == 0:
            return cls.uniform()
        return cls("power", k)

    @classmethod
    def tabulated(cls, rows):
        """Piecewise-linear weights from ``(gamma, f)`` rows.

        Tables whose trapezoid integral is within 1e-4 of one are rescaled to
        integrate to one exactly; anything further off is rejected.
        """
        grid = np.array(rows, dtype=float)
        if grid.ndim != 2 or grid.shape[1] != 2:
            raise ConstructionError("tabulated weighting needs (gamma, f) rows")
        if not np.all(np.isfinite(grid)):
            raise ConstructionError("tabulated weighting has non-finite entries")
        _check_grid(grid[:, 0], "tabulated weighting")
        fv = grid[:, 1]
        if np.any(fv < 0):
            raise ConstructionError("weighting function must be non-negative")
        if np.any(np.diff(fv) < 0):
            raise ConstructionError("weighting function must be non-decreasing")
        total = float(np.trapezoid(fv, grid[:, 0]))
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise ConstructionError(
                f"weighting function integrates to {total:.6g}, not 1")
        grid[:, 1] = fv / total
        grid.setflags(write=False)
        return cls("tabulated", 0.0, grid)

    @property
    def gridded(self) -> bool:
        return self.family == "tabulated"

    def __call__(self, gamma):
        g = np.asarray(gamma, dtype=float)
        if self.family == "uniform":
            return np.ones_like(g)
        if self.family == "power":
            k = self.exponent
            return (k + 1.0) * g ** k
        return np.interp(g, self.grid[:, 0], self.grid[:, 1])

    def __repr__(self):
        if self.family == "power":
            return f"WeightingFunction.power_law({self.exponent:g})"
        if self.gridded:
            return f"WeightingFunction.tabulated({len(self.grid)} rows)"
        return "WeightingFunction.uniform()"


@lru_cache(maxsize=256)
def _gauss_rule(n: int, k: float):
    # nodes/weights on [0, 1] for int g(x) (k+1) x**k dx
    if k == 0.0:
        x, w = roots_legendre(n)
        return (x + 1.0) / 2.0, w / 2.0
    x, w = roots_jacobi(n, 0.0, k)
    return (x + 1.0) / 2.0, w * (k + 1.0) / 2.0 ** (k + 1.0)


def quadrature_rule(A: FuzzyNumber, f: WeightingFunction, n: int = QUAD_NODES):
    """Nodes ``gamma_i`` and weights ``w_i`` (``f`` folded in, summing to one)."""
    if not (A.gridded or f.gridded):
        return _gauss_rule(n, f.exponent)
    grids = [m.grid[:, 0] for m in (A, f) if m.gridded]
    g = np.unique(np.concatenate(grids + [np.array([0.0, 1.0])]))
    # Gauss rule on every panel of the native grid: the data are linear there
    nodes, weights = [], []
    x, w = _gauss_rule(PANEL_NODES, 0.0)
    for a, b in zip(g[:-1], g[1:]):
        if a == 0.0 and f.family == "power" and f.exponent > 0.0:
            xj, wj = _gauss_rule(PANEL_NODES, f.exponent)
            nodes.append(b * xj)
            weights.append(wj * b ** (f.exponent + 1.0))
            continue
        gi = a + (b - a) * x
        nodes.append(gi)
        weights.append((b - a) * w * f(gi))
    g, w = np.concatenate(nodes), np.concatenate(weights)
    return g, w / w.sum()


def atoms(A: FuzzyNumber, f: WeightingFunction):
    """Flatten ``A`` under ``f`` into weighted points.

    ``E_f(u(A)) == weights @ u(points)`` for every ``u``; a probabilistic
    risk has the same representation, which is what the solver consumes.
    """
    g, w = quadrature_rule(A, f)
    a1, a2 = A.endpoints(g)
    return np.concatenate([a1, a2]), np.concatenate([w, w]) / 2.0


def _evaluate_checked(u, x, g, endpoint):
    dom = getattr(u, "domain", None)
    if dom is not None:
        ok = dom.contains(x)
        if not np.all(ok):
            i = int(np.argmin(ok))
            raise DomainError(
                f"integrand undefined at {endpoint}(gamma={g[i]:.6g}) = {x[i]!r}; "
                f"validity interval {dom}")
    out = np.asarray(u(x), dtype=float)
    if np.isnan(out).any():
        i = int(np.argmax(np.isnan(out)))
        raise DomainError(f"integrand is NaN at {endpoint}(gamma={g[i]:.6g}) = {x[i]!r}")
    return out


def possibilistic_expected_utility(A: FuzzyNumber, f: WeightingFunction, u) -> float:
    """``E_f(u(A))``; ``u`` is any vectorised callable, checked against ``u.domain`` if present."""
    g, w = quadrature_rule(A, f)
    a1, a2 = A.endpoints(g)
    u1 = _evaluate_checked(u, a1, g, "a1")
    u2 = _evaluate_checked(u, a2, g, "a2")
    return float(0.5 * (w @ u1 + w @ u2))


def possibilistic_expected_value(A: FuzzyNumber, f: WeightingFunction) -> float:
    """``E_f(A)``, the possibilistic mean."""
    g, w = quadrature_rule(A, f)
    a1, a2 = A.endpoints(g)
    return float(0.5 * (w @ a1 + w @ a2))


def centered(A: FuzzyNumber, f: WeightingFunction) -> FuzzyNumber:
    """Shift ``A`` so that its possibilistic mean under ``f`` is zero."""
    return A.shifted(-possibilistic_expected_value(A, f))
