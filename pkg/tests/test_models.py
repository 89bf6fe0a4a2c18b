import math

import numpy as np
import pytest
from scipy.optimize import brentq

from possprev import kernels
from possprev.errors import DomainError, ModelMismatchError
from possprev.fuzzy import FuzzyNumber, WeightingFunction, possibilistic_expected_utility
from possprev.models import (ALL_MODELS, Corner, ModelId, Scenario, marginal_utility,
                             second_derivative, solve_optimal, total_utility, upper_bound)
from possprev.oracle import OracleConfig, oracle_argmax
from possprev.preferences import LossProbability, UtilityFunction
from possprev.stochastic import DiscreteRandomVariable


def test_model_id_parsing():
    assert ModelId.parse("4") is ModelId.M4
    assert ModelId.parse("M7") is ModelId.M7
    assert ModelId.parse("bench") is ModelId.BENCHMARK
    with pytest.raises(ValueError):
        ModelId.parse("m9")


class TestBenchmark:
    def test_total_utility_at_zero(self, log_scenario):
        expected = math.log(10) + 0.5 * math.log(5) + 0.5 * math.log(10)
        assert total_utility(log_scenario, "benchmark", 0.0) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(4.258596595708119, rel=1e-14)

    def test_marginal_at_zero(self, log_scenario):
        assert marginal_utility(log_scenario, "benchmark", 0.0) == pytest.approx(-0.1 + 0.5 * math.log(2), rel=1e-13)

    def test_optimum(self, log_scenario):
        # u'(w1 - e) = -p'(e) [v(w2) - v(w2 - l)]  solved independently
        ref = brentq(lambda e: 1 / (10 - e) - 0.5 * math.exp(-e) * math.log(2), 0, 5, xtol=1e-15)
        r = solve_optimal(log_scenario, "benchmark")
        assert r.corner is Corner.INTERIOR and 1.0 < r.e_star < 1.2
        assert r.e_star == pytest.approx(ref, abs=1e-12)
        assert abs(r.foc_residual) <= 1e-10

    def test_oracle_argmax(self, log_scenario):
        r = solve_optimal(log_scenario, "benchmark")
        assert abs(oracle_argmax(log_scenario, "benchmark") - r.e_star) <= 1e-4

    def test_at_zero(self, log_scenario):
        s = log_scenario.replace(p=LossProbability.exponential(0.01, 0.1))
        r = solve_optimal(s, "benchmark")
        assert r.corner is Corner.AT_ZERO and r.e_star == 0.0 and r.v_prime_at_zero < 0
        assert oracle_argmax(s, "benchmark", OracleConfig()) == 0.0

    def test_at_upper_bound(self):
        s = Scenario(1.0, 100.0, 99.0, UtilityFunction.cara(0.01), UtilityFunction.log(),
                     LossProbability.exponential(0.9, 0.5))
        r = solve_optimal(s, "benchmark")
        assert r.corner is Corner.AT_UPPER_BOUND and r.e_star == r.upper_bound == 1.0


class TestModels:
    @pytest.mark.parametrize("m", ALL_MODELS, ids=str)
    def test_marginal_matches_differences(self, full_scenario, m):
        h = 1e-5
        for e in (0.3, 1.0, 2.5):
            fd = (total_utility(full_scenario, m, e + h) - total_utility(full_scenario, m, e - h)) / (2 * h)
            assert fd == pytest.approx(marginal_utility(full_scenario, m, e), rel=1e-6)
            fd2 = (marginal_utility(full_scenario, m, e + h) - marginal_utility(full_scenario, m, e - h)) / (2 * h)
            assert fd2 == pytest.approx(second_derivative(full_scenario, m, e), rel=1e-6)

    @pytest.mark.parametrize("m", ALL_MODELS, ids=str)
    def test_strictly_concave(self, full_scenario, m):
        grid = np.linspace(0, upper_bound(full_scenario, m), 100)
        assert np.all(np.diff(marginal_utility(full_scenario, m, grid)) < 0)
        assert np.all(second_derivative(full_scenario, m, grid) < 0)

    def test_model6_period2_uses_loss(self, full_scenario):
        s, e = full_scenario, 0.8
        A, B = s.risk(1, "fuzzy"), s.risk(2, "fuzzy")
        p = s.p(e)
        expected = (possibilistic_expected_utility(A.shifted(s.w1 - e), s.f, s.u)
                    + p * possibilistic_expected_utility(B.shifted(s.w2 - s.l), s.f, s.v)
                    + (1 - p) * possibilistic_expected_utility(B.shifted(s.w2), s.f, s.v))
        assert total_utility(s, "m6", e) == pytest.approx(expected, rel=1e-14)

    def test_model3_keeps_sure_state(self, full_scenario):
        s, e = full_scenario, 0.8
        X, Y = s.risk(1, "random"), s.risk(2, "random")
        p = s.p(e)
        expected = (X.probs @ np.log(s.w1 - e + X.values)
                    + p * (Y.probs @ np.log(s.w2 - s.l + Y.values))
                    + (1 - p) * (Y.probs @ np.log(s.w2 + Y.values)))
        assert total_utility(s, "m3", e) == pytest.approx(expected, rel=1e-14)

    def test_degenerate_risks(self, crisp_scenario):
        e_b = solve_optimal(crisp_scenario, "benchmark").e_star
        for m in ALL_MODELS:
            assert solve_optimal(crisp_scenario, m).e_star == pytest.approx(e_b, abs=1e-9)
            for e in (0.0, 0.7, 3.0):
                assert total_utility(crisp_scenario, m, e) == pytest.approx(
                    total_utility(crisp_scenario, "benchmark", e), abs=1e-13)

    def test_crisp_oracle_argmax(self, crisp_scenario):
        cfg = OracleConfig(gamma_grid_size=10_000)
        assert oracle_argmax(crisp_scenario, "m4", cfg) == oracle_argmax(crisp_scenario, "benchmark", cfg)

    def test_missing_risk(self, log_scenario):
        with pytest.raises(ModelMismatchError, match="model m4 requires a period-1 fuzzy risk"):
            solve_optimal(log_scenario, "m4")

    def test_wrong_kind(self, log_scenario):
        s = log_scenario.replace(risk1=DiscreteRandomVariable([[-1, 0.5], [1, 0.5]]))
        assert s.supports("m1") and not s.supports("m4")
        with pytest.raises(ModelMismatchError):
            solve_optimal(s, "m4")

    def test_domain_error_names_scenario(self, log_scenario):
        s = log_scenario.replace(risk2=FuzzyNumber.triangular(0, 6, 1))
        with pytest.raises(DomainError, match="'log'"):
            solve_optimal(s, "m5")

    def test_upper_bound_respects_floor(self, full_scenario):
        ub = upper_bound(full_scenario, "m4")
        assert ub == pytest.approx(10 - 1.5 - 1e-6)
        with pytest.raises(DomainError):
            total_utility(full_scenario, "m4", ub + 1e-3)

    def test_power_weighting_changes_fuzzy_models(self, full_scenario):
        s = full_scenario.replace(f=WeightingFunction.power_law(2))
        assert solve_optimal(s, "m1").e_star == solve_optimal(full_scenario, "m1").e_star
        assert solve_optimal(s, "m4").e_star != solve_optimal(full_scenario, "m4").e_star


@pytest.mark.parametrize("m", ALL_MODELS, ids=str)
def test_backends_agree(full_scenario, m):
    py = solve_optimal(full_scenario, m, backend=kernels.load("python"))
    native = solve_optimal(full_scenario, m)
    assert py.backend == "python"
    assert py.e_star == pytest.approx(native.e_star, abs=1e-12)
