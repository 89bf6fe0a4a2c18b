import math

import numpy as np
import pytest

from possprev.errors import ConstructionError, DomainError
from possprev.preferences import (LossProbability, UtilityFunction, eval_loss_probability,
                                  eval_utility)
from possprev.stochastic import (DiscreteRandomVariable, centered, discretize_normal,
                                 expected_value, probabilistic_expected_utility)

FAMILIES = [UtilityFunction.log(), UtilityFunction.crra(0.5), UtilityFunction.crra(3.0),
            UtilityFunction.cara(0.7), UtilityFunction.quadratic(0.02)]


class TestDiscrete:
    @pytest.mark.parametrize("rows, mean", [([[-1, 0.5], [1, 0.5]], 0.0), ([[0, 1.0]], 0.0),
                                            ([[-2, 0.25], [2, 0.75]], 1.0)])
    def test_expected_value(self, rows, mean):
        assert expected_value(DiscreteRandomVariable(rows)) == pytest.approx(mean, abs=1e-15)

    def test_square(self):
        X = DiscreteRandomVariable([[-1, 0.5], [1, 0.5]])
        assert probabilistic_expected_utility(X, lambda x: x * x) == pytest.approx(1.0)

    def test_point_mass(self):
        assert probabilistic_expected_utility(DiscreteRandomVariable.point_mass(0.0), np.cosh) == 1.0

    def test_jensen(self):
        X = DiscreteRandomVariable([[-1, 0.5], [1, 0.5]])
        assert probabilistic_expected_utility(X, np.exp) >= math.exp(0.0)

    @pytest.mark.parametrize("rows", [[[0, 0.5], [1, 0.4]], [[0, 1.0], [1, 0.0]],
                                      [[math.inf, 1.0]], []])
    def test_rejects(self, rows):
        with pytest.raises(ConstructionError):
            DiscreteRandomVariable(rows)

    def test_domain_error(self):
        X = DiscreteRandomVariable([[-1, 0.5], [1, 0.5]])
        with pytest.raises(DomainError):
            probabilistic_expected_utility(X, UtilityFunction.log())

    def test_centered(self):
        X = centered(DiscreteRandomVariable([[0, 0.3], [2, 0.7]]))
        assert expected_value(X) == pytest.approx(0, abs=1e-15)


class TestNormal:
    def test_three_point_moments(self):
        X = discretize_normal(0, 1, 3)
        assert expected_value(X) == pytest.approx(0, abs=1e-12)
        assert float(X.probs @ X.values ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_mean_seven(self):
        assert expected_value(discretize_normal(2, 1, 7)) == pytest.approx(2, abs=1e-9)

    @pytest.mark.parametrize("stdev, n", [(0.0, 3), (-1.0, 3), (1.0, 2)])
    def test_rejects(self, stdev, n):
        with pytest.raises(ConstructionError):
            discretize_normal(5, stdev, n)


class TestUtility:
    def test_log_marginal(self):
        assert eval_utility(UtilityFunction.log(), 1, 2.0) == pytest.approx(0.5)

    def test_cara_third(self):
        assert eval_utility(UtilityFunction.cara(1.0), 3, 0.0) == pytest.approx(1.0)

    def test_quadratic_third(self):
        assert eval_utility(UtilityFunction.quadratic(0.1), 3, 1.3) == 0.0

    def test_crra_one_rejected(self):
        with pytest.raises(ConstructionError):
            UtilityFunction.crra(1.0)

    def test_log_domain(self):
        with pytest.raises(DomainError):
            eval_utility(UtilityFunction.log(), 0, -1.0)

    def test_quadratic_domain(self):
        with pytest.raises(DomainError):
            eval_utility(UtilityFunction.quadratic(0.1), 0, 6.0)

    def test_prudence_flags(self):
        assert [u.prudent for u in FAMILIES] == [True, True, True, True, False]

    @pytest.mark.parametrize("u", FAMILIES, ids=repr)
    def test_derivatives_match_differences(self, u, rng):
        h = 1e-5
        lo = 0.5 if math.isfinite(u.domain.lo) else -3.0
        hi = min(5.0, u.domain.hi - 1.0)
        for x in rng.uniform(lo, hi, 50):
            for order in (1, 2, 3):
                fd = (u.eval(order - 1, x + h) - u.eval(order - 1, x - h)) / (2 * h)
                assert fd == pytest.approx(u.eval(order, x), rel=1e-6, abs=1e-9)

    @pytest.mark.parametrize("u", FAMILIES, ids=repr)
    def test_signs(self, u, rng):
        lo = 0.01 if math.isfinite(u.domain.lo) else -20.0
        hi = min(50.0, u.domain.hi - 1e-3)
        x = rng.uniform(lo, hi, 1000)
        assert np.all(u.eval(1, x) > 0) and np.all(u.eval(2, x) < 0)


class TestLossProbability:
    def test_exponential_values(self):
        p = LossProbability.exponential(0.5, 1.0)
        assert eval_loss_probability(p, 0, 0.0) == pytest.approx(0.5)
        assert eval_loss_probability(p, 1, 0.0) == pytest.approx(-0.5)

    def test_rational_curvature(self):
        # p0 k (k + 1) / (1 + e)^(k + 2) = 0.5 * 6 / 16
        p = LossProbability.rational(0.5, 2.0)
        assert eval_loss_probability(p, 2, 1.0) == pytest.approx(0.1875)

    def test_negative_effort(self):
        with pytest.raises(DomainError):
            eval_loss_probability(LossProbability.exponential(0.5, 1.0), 0, -0.1)

    @pytest.mark.parametrize("p0, k", [(0.0, 1.0), (1.0, 1.0), (0.5, 0.0), (0.5, -1.0)])
    def test_rejects(self, p0, k):
        with pytest.raises(ConstructionError):
            LossProbability.exponential(p0, k)

    @pytest.mark.parametrize("p", [LossProbability.exponential(0.3, 0.8),
                                   LossProbability.rational(0.7, 1.5)], ids=repr)
    def test_signs_and_differences(self, p, rng):
        e = rng.uniform(0, 20, 1000)
        assert np.all((p.eval(0, e) > 0) & (p.eval(0, e) < 1))
        assert np.all(p.eval(1, e) < 0) and np.all(p.eval(2, e) > 0)
        h = 1e-5
        for x in e[:50] + h:
            for order in (1, 2):
                fd = (p.eval(order - 1, x + h) - p.eval(order - 1, x - h)) / (2 * h)
                assert fd == pytest.approx(p.eval(order, x), rel=1e-6, abs=1e-12)
