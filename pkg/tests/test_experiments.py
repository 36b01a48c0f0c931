from __future__ import annotations

import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinktarget.alpha_factory import golden, make_badly_approximable, make_liouville, sqrt2, sqrt3
from shrinktarget.experiments import (
    counterexample_verify,
    coverage_probe,
    kim_statistic,
    loglaw_estimate,
    oracle_corpus,
    oracle_equivalence,
    separation_demo,
    validate_case2_trace,
    verify_ez_lemma,
)
from shrinktarget.experiments.report import (
    ETA_REACHED,
    PASS,
    REDIRECT,
    SKIPPED,
    Report,
    jsonable,
)
from shrinktarget.experiments.statistics import convergent_products, decade_checkpoints, draw_samples
from shrinktarget.targets import parse_sequence


def test_jsonable_encodes_exact_values():
    out = jsonable({"x": Fraction(3, 4), "big": 1 << 80, "small": 7, "f": 0.5, "nan": float("nan")})
    assert out["x"] == "3/4" and out["big"] == str(1 << 80) and out["small"] == 7 and out["f"] == 0.5
    json.dumps(out)


def test_report_csv_and_json():
    rep = Report("cf", "quadratic:0,1,2", {"depth": 2}, [{"i": 0, "q": 1}, {"i": 1, "q": 2}], PASS, {},
                 ["i", "q"])
    assert rep.to_csv().splitlines() == ["i,q", "0,1", "1,2"]
    assert json.loads(rep.to_json())["verdict"] == PASS


def test_ez_lemma_sqrt2_exact_value():
    rep = verify_ez_lemma(sqrt2(), 3, Fraction(1, 10))
    assert rep.verdict == PASS
    assert rep.summary["exact_measure"] == Fraction(24, 170)


@given(st.sampled_from([sqrt2, golden, sqrt3, lambda: make_badly_approximable(3, 2)]), st.integers(1, 8),
       st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(49, 100), max_denominator=1000))
@settings(max_examples=30)
def test_ez_lemma_property(make, i, eps):
    rep = verify_ez_lemma(make(), i, eps)
    assert rep.verdict == PASS
    assert rep.checkpoints[0]["inner"] >= eps


def test_counterexample_small():
    rep = counterexample_verify(make_liouville(2), 2, 4)
    assert rep.verdict == PASS
    for row in rep.checkpoints:
        assert row["outer_measure"] <= Fraction(4, row["n"] ** 2)
        assert row["power_sum_lo"] >= Fraction(1, 2)


def test_coverage_inner_monotone():
    rep = coverage_probe(golden(), parse_sequence("power:c=1/4,beta=1/2"), 2, budget=2000)
    inner = [r["inner"] for r in rep.checkpoints]
    assert inner == sorted(inner)
    assert all(r["inner"] <= r["outer"] for r in rep.checkpoints)
    assert rep.verdict == ETA_REACHED


def test_coverage_rejects_large_epsilon():
    with pytest.raises(ValueError):
        coverage_probe(golden(), parse_sequence("power:c=1/4,beta=1/2"), 2, epsilon=Fraction(9, 10), budget=10)


def test_case2_trace_small_and_redirect():
    ok = validate_case2_trace(golden(), parse_sequence("power:c=1/256,beta=1/2"), 2)
    assert ok.verdict == PASS
    big = validate_case2_trace(golden(), parse_sequence("power:c=1/2,beta=1/2"), 2)
    assert big.verdict == REDIRECT


def test_separation_s1_skipped():
    assert separation_demo(1).verdict == SKIPPED


def test_separation_small_N():
    rep = separation_demo(2, 10 ** 5)
    assert rep.verdict == PASS
    p1 = rep.summary["panel_i"]
    assert p1["star_sum_final"] <= p1["majorant_sum_final"] <= p1["geometric_bound"]
    assert rep.summary["panel_ii"]["power_sum_final"] < 2.613


def test_kim_zero_sample_liminf():
    rep = kim_statistic(sqrt2(), [Fraction(0)], 10 ** 5)
    row = rep.checkpoints[0]
    # liminf n ||n sqrt2|| = 1/(2 sqrt2), approached by the convergent denominators
    assert 0.35 < row["tail_min"] < 1 / (2 * math.sqrt(2)) + 1e-3
    assert row["min"] == pytest.approx(2 * (3 - 2 * math.sqrt(2)), rel=1e-9)  # n = 2


def test_loglaw_rows_consistent():
    xs = draw_samples(1, 4)
    rep = loglaw_estimate(golden(), xs, 10 ** 4)
    for row in rep.checkpoints:
        assert row["tail_sup"] <= row["sup"]
        sups = [row[f"sup@{c}"] for c in decade_checkpoints(10 ** 4)]
        assert sups == sorted(sups)


def test_draw_samples_reproducible():
    assert draw_samples(3, 5) == draw_samples(3, 5)
    assert all(0 <= x < 1 for x in draw_samples(3, 100))


def test_convergent_products_sqrt2():
    vals = convergent_products(sqrt2(), 20)
    assert vals[-1][1] == pytest.approx(1 / (2 * math.sqrt(2)), rel=1e-12)


def test_oracle_small_corpus():
    corpus = oracle_corpus(seed=4, size=5)
    rep = oracle_equivalence(corpus, samples=20_000, seed=4)
    assert rep.verdict == PASS
    assert all(0 < r["measure_float"] <= 1 for r in rep.checkpoints)
