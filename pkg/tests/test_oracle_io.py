import json

import pytest
import yaml

from possprev.errors import ConstructionError, SchemaError
from possprev.fuzzy import FuzzyNumber, WeightingFunction, possibilistic_expected_value
from possprev.models import ModelId, solve_optimal, total_utility
from possprev.oracle import (OracleConfig, oracle_discrete_expectation, oracle_expected_utility,
                             oracle_expected_value, oracle_total_utility)
from possprev.scenario_io import parse_document, scenario_to_dict, set_path
from possprev.stochastic import DiscreteRandomVariable

BASE = """\
id: demo
wealth: {w1: 10, w2: 10}
loss: 5
utilities: {u: log, v: {crra: {eta: 2}}}
loss_probability: {rational_loss: {p0: 0.5, k: 2}}
"""


class TestOracle:
    def test_config_limits(self):
        with pytest.raises(ConstructionError):
            OracleConfig(gamma_grid_size=999)
        with pytest.raises(ConstructionError):
            OracleConfig(effort_grid_step=1e-3)

    def test_square_power_law(self):
        A = FuzzyNumber.triangular(0, 1, 1)
        val = oracle_expected_utility(A, WeightingFunction.power_law(1), lambda x: x * x)
        assert val == pytest.approx(1 / 6, abs=1e-7)

    def test_identity_matches_value(self):
        A = FuzzyNumber.trapezoidal(0.1, 0.4, 1.0, 0.5)
        f = WeightingFunction.power_law(0.5)
        assert oracle_expected_utility(A, f, lambda x: x) == oracle_expected_value(A, f)
        assert oracle_expected_value(A, f) == pytest.approx(possibilistic_expected_value(A, f), abs=1e-9)

    def test_tabulated_weights(self):
        A = FuzzyNumber.triangular(0, 1, 2)
        f = WeightingFunction.tabulated([[0, 0], [0.5, 1], [1, 2]])
        assert oracle_expected_value(A, f) == pytest.approx(possibilistic_expected_value(A, f), abs=1e-9)

    def test_discrete(self):
        X = DiscreteRandomVariable([[-2, 0.25], [2, 0.75]])
        assert oracle_discrete_expectation(X, lambda x: x) == 1.0

    def test_total_utility(self, full_scenario):
        for m in ModelId:
            assert oracle_total_utility(full_scenario, m, 0.9)[0] == pytest.approx(
                total_utility(full_scenario, m, 0.9), abs=1e-8)

    def test_tolerance_report(self):
        cfg = OracleConfig()
        cfg.record(1.0, 1.0 + 1e-9)
        assert cfg.tolerance_report == [pytest.approx(1e-9)]


class TestScenarioFiles:
    def test_minimal(self):
        [(s, models)], _ = parse_document(BASE)
        assert s.name == "demo" and models is None
        assert s.supported_models() == [ModelId.BENCHMARK]

    def test_exponent_floats(self):
        [(s, _)], _ = parse_document(BASE.replace("loss: 5", "loss: 5e0"))
        assert s.l == 5.0

    def test_json_accepted(self):
        data = yaml.safe_load(BASE)
        [(s, _)], _ = parse_document(json.dumps(data))
        assert s.w1 == 10.0

    def test_unknown_key_line(self):
        with pytest.raises(SchemaError, match=r"line 6: colour: unknown key"):
            parse_document(BASE + "colour: red\n")

    def test_nested_field_diagnostic(self):
        text = BASE.replace("{crra: {eta: 2}}", "{crra: {eta: -2}}")
        with pytest.raises(SchemaError, match=r"line 4: utilities\.v"):
            parse_document(text)

    def test_missing_required(self):
        with pytest.raises(SchemaError, match="missing required key 'loss'"):
            parse_document(BASE.replace("loss: 5\n", ""))

    def test_risk_pairs_and_models(self):
        text = BASE + ("risk1: [{triangular: [0, 1, 1]}, {discrete: [[-1, 0.5], [1, 0.5]]}]\n"
                       "risk2: {normal: {mean: 0, stdev: 1, nodes: 5}, shift: 0.5}\n"
                       "models: [b, 4, m8]\n")
        [(s, models)], _ = parse_document(text)
        assert models == [ModelId.BENCHMARK, ModelId.M4, ModelId.M8]
        assert s.risk(2, "random").support[0] > -5

    def test_batch(self):
        body = "".join("  " + line + "\n" for line in BASE.splitlines())
        text = "scenarios:\n" + body.replace("  id: demo", "- id: a", 1) + body.replace("  id: demo", "- id: b", 1)
        scenarios, _ = parse_document(text)
        assert [s.name for s, _ in scenarios] == ["a", "b"]

    def test_round_trip(self, full_scenario):
        text = yaml.safe_dump(scenario_to_dict(full_scenario, ["m6"]))
        [(s, models)], _ = parse_document(text)
        assert models == [ModelId.M6]
        assert solve_optimal(s, "m6").e_star == solve_optimal(full_scenario, "m6").e_star

    def test_set_path(self):
        data = yaml.safe_load(BASE)
        assert set_path(data, "wealth.w1", 12.0)["wealth"]["w1"] == 12.0
        assert data["wealth"]["w1"] == 10
        with pytest.raises(SchemaError):
            set_path(data, "wealth.w3", 1.0)
        with pytest.raises(SchemaError):
            set_path(data, "utilities.u", 1.0)

    def test_invalid_yaml(self):
        with pytest.raises(SchemaError, match="line"):
            parse_document("wealth: [1, 2\n")
