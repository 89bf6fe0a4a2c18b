import numpy as np
import pytest

from possprev.fuzzy import FuzzyNumber, WeightingFunction
from possprev.models import Scenario
from possprev.preferences import LossProbability, UtilityFunction
from possprev.stochastic import DiscreteRandomVariable

# criterion number -> (ok, detail); filled by test_acceptance.py
GATE = {}


@pytest.fixture
def gate():
    def record(number, title, ok, detail=""):
        GATE[number] = (title, bool(ok), detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not GATE:
        return
    terminalreporter.section("acceptance gate")
    for number in sorted(GATE):
        title, ok, detail = GATE[number]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}  {detail}".rstrip())


@pytest.fixture
def log_scenario():
    """w1 = w2 = 10, l = 5, logarithmic utilities, p(e) = 0.5 exp(-e)."""
    return Scenario(10.0, 10.0, 5.0, UtilityFunction.log(), UtilityFunction.log(),
                    LossProbability.exponential(0.5, 1.0), name="log")


@pytest.fixture
def full_scenario(log_scenario):
    """Zero-mean fuzzy and random risks in both periods."""
    return log_scenario.replace(
        risk1=(FuzzyNumber.triangular(0.0, 1.5, 1.5),
               DiscreteRandomVariable([[-1.0, 0.5], [1.0, 0.5]])),
        risk2=(FuzzyNumber.triangular(0.0, 2.0, 2.0),
               DiscreteRandomVariable([[-1.5, 0.25], [0.5, 0.75]])),
        name="full")


@pytest.fixture
def crisp_scenario(log_scenario):
    zero = (FuzzyNumber.crisp(0.0), DiscreteRandomVariable.point_mass(0.0))
    return log_scenario.replace(risk1=zero, risk2=zero, name="crisp")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
