"""Acceptance gate: one check per criterion, each line printed in the terminal summary.

Tolerances and counts are pinned here and mirrored by the ``check`` suites.
"""

import subprocess
import sys
import time

import pytest

from possprev import checks
from possprev.models import ModelId, solve_optimal
from possprev.oracle import OracleConfig, oracle_argmax

SEED = 42


def _detail(lines):
    return "; ".join(
        f"{l.label}: {l.passed} ok/{l.failed} bad" + ("" if l.worst != l.worst else f", worst {l.worst:.2e}")
        for l in lines)


def test_criterion_1_core_vs_oracle(gate):
    t0 = time.perf_counter()
    lines = checks.oracle_suite(SEED, count=200)
    elapsed = time.perf_counter() - t0
    quad, red, _ = lines
    ok = quad.ok and quad.passed >= 200 and quad.worst <= 1e-6 and red.ok and red.worst <= 1e-12 \
        and elapsed < 60
    gate("1", "quadrature vs midpoint oracle", ok, _detail(lines[:2]) + f"; {elapsed:.1f}s")
    assert ok


def test_criterion_2_jensen_and_linearity(gate):
    lines = checks.jensen_suite(SEED, count=500)
    ok = all(l.ok and l.passed == 500 for l in lines)
    gate("2", "Jensen and linearity", ok, _detail(lines))
    assert ok


@pytest.fixture(scope="module")
def focs():
    return checks.foc_suite(SEED, count=100)


def test_criterion_3_first_order_conditions(gate, focs):
    foc, mono, arg, _ = focs
    ok = foc.ok and mono.ok and arg.ok and mono.passed == 900 and arg.passed == 900
    gate("3", "FOC residuals, concavity, grid argmax", ok, _detail([foc, mono, arg]))
    assert ok


def test_criterion_4_degeneracy(gate, focs):
    deg = focs[3]
    ok = deg.ok and deg.passed == 100 and deg.worst <= 1e-9
    gate("4", "crisp risks collapse all nine optima", ok, _detail([deg]))
    assert ok


def test_criterion_5_equivalences(gate):
    lines = checks.equivalence_lines(SEED, count=1000)
    ok = all(l.ok and l.passed + l.undecided == 1000 for l in lines)
    gate("5", "eight equivalences, 1000 scenarios each", ok,
         f"violations={sum(l.failed for l in lines)}, "
         f"decided={sum(l.passed for l in lines)}, ties={sum(l.undecided for l in lines)}")
    assert ok


@pytest.fixture(scope="module")
def sufficient():
    lines = checks.sufficient_lines(SEED, count=1000)
    lines.append(checks.lemma_line(SEED, count=1000))
    lines.append(checks.quadratic_boundary_line(SEED, count=1000))
    return {l.label: l for l in lines}


@pytest.mark.xfail(strict=True,
                   reason="C6_2 and C6_6 as stated are contradicted on prudent zero-mean scenarios; "
                          "the reversed ordering holds (criterion 6 reversed check)")
def test_criterion_6_sufficient_conditions(gate, sufficient):
    stated = [l for k, l in sufficient.items() if "reversed" not in k]
    ok = all(l.ok for l in stated)
    bad = [l.label for l in stated if not l.ok]
    gate("6", "sufficient conditions, lemma, quadratic boundary", ok,
         f"failing: {', '.join(bad) or 'none'}; " + _detail(stated))
    assert ok


def test_criterion_6_reversed_orderings(gate, sufficient):
    rev = [l for k, l in sufficient.items() if "reversed" in k]
    ok = len(rev) == 2 and all(l.ok and l.passed == 1000 for l in rev)
    gate("6r", "C6_2/C6_6 with the ordering reversed", ok, _detail(rev))
    assert ok


def test_criterion_6_holding_parts(sufficient):
    for label in ("C5_2 as stated", "C5_5 as stated", "C6_4 as stated", "L5_4 lemma",
                  "C5_2 quadratic boundary"):
        assert sufficient[label].ok, sufficient[label].summary()


def test_criterion_7_ambiguity(gate):
    lines = checks.ambiguity_lines(SEED, budget=10_000)
    ok = all(l.ok for l in lines)
    gate("7", "ambiguity witnesses both ways", ok, "; ".join(f"{l.label}: {l.note}" for l in lines))
    assert ok


def test_criterion_8_worked_instance(gate, log_scenario):
    r = solve_optimal(log_scenario, ModelId.BENCHMARK)
    grid = oracle_argmax(log_scenario, ModelId.BENCHMARK, OracleConfig())
    ok = r.interior and 1.0 < r.e_star < 1.2 and abs(r.e_star - grid) <= 1e-4
    gate("8", "log benchmark e* in (1.0, 1.2), oracle within 1e-4", ok,
         f"e*={r.e_star:.10f}, grid={grid:.4f}")
    assert ok


def test_criterion_9_cli_contract(gate, tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("id: x\nwealth: {w1: 10, w2: 10}\nloss: 5\nutilities: {u: log, v: log}\n"
                   "loss_probability: {exp_loss: {p0: 0.5, k: 1}}\ncolour: red\n")
    schema = subprocess.run([sys.executable, "-m", "possprev.cli", "solve", str(bad)],
                            capture_output=True, text=True)
    cmd = [sys.executable, "-m", "possprev.cli", "check", "--suite", "all", "--seed", "42"]
    runs = [subprocess.Popen(cmd, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
            for _ in range(2)]
    (out1, _), (out2, _) = (p.communicate() for p in runs)
    schema_ok = (schema.returncode == 2 and "line 6" in schema.stderr and "colour" in schema.stderr
                 and "Traceback" not in schema.stderr)
    ok = schema_ok and out1 == out2 and len(out1) > 0
    gate("9", "schema errors exit 2; check --suite all --seed 42 deterministic", ok,
         f"schema exit={schema.returncode}, identical={out1 == out2}, "
         f"check exit={runs[0].returncode}")
    assert ok
