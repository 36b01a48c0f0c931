from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from shrinktarget import cf_engine as cf
from shrinktarget.alpha_factory import (
    CONSISTENT,
    WITNESS,
    AlphaSpecError,
    golden,
    make_badly_approximable,
    make_liouville,
    parse_alpha,
    probe_omega,
    quadratic,
    rational,
    sqrt2,
)


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(1, 10 ** 6), st.booleans())
def test_parse_round_trip_rational(p, q, norm):
    spec = rational(p, q).with_normalization(norm)
    assert parse_alpha(spec.text) == spec


@pytest.mark.parametrize("spec", [sqrt2(), golden(), quadratic(3, 7, 13), make_liouville(Fraction(3, 2)),
                                  make_badly_approximable(4, 11), sqrt2().with_normalization()])
def test_parse_round_trip_named(spec):
    assert parse_alpha(spec.text) == spec


@pytest.mark.parametrize("text", ["", "quadratic:1,2", "quadratic:0,1,4", "rule:nope:x=1", "rational:1/0",
                                  "rule:liouville:sigma=0", "cubic:1"])
def test_parse_rejects_malformed(text):
    with pytest.raises(AlphaSpecError):
        parse_alpha(text)


def test_liouville_quotients_follow_rule():
    # a_{k+1} = max(2, k * ceil(q_k^2)), recomputed here with plain integers
    pq = make_liouville(2).quotients()
    a, q_prev, q = [0], 0, 1
    for k in range(5):
        nxt = max(2, k * q * q)
        a.append(nxt)
        q_prev, q = q, nxt * q + q_prev
    assert pq.quotients(6) == a == [0, 2, 4, 162, 6394800, 348674058042077376324]


@given(st.integers(1, 12), st.integers(0, 10 ** 6))
def test_bounded_quotients_in_range(bound, seed):
    pq = make_badly_approximable(bound, seed).quotients()
    assert all(1 <= x <= bound for x in pq.quotients(40))
    # deterministic in the seed
    assert pq.quotients(40) == make_badly_approximable(bound, seed).quotients().quotients(40)


def test_normalized_spec_changes_only_integer_part():
    # phi - 2 = [-1; 1, 1, ...]: the nearest integer is removed, the sign kept
    pq = golden().with_normalization().quotients()
    assert pq.quotients(4) == [-1, 1, 1, 1]
    assert cf.denominators(pq, 6) == cf.denominators(golden().quotients(), 6)


def test_probe_golden_badly_approximable():
    res = probe_omega(golden(), 0, 24)
    assert res.verdict == CONSISTENT
    lo, hi = res.inf_statistic
    # q_i Delta_i alternates around 1/sqrt(5); the smallest over i >= 2 sits at q_3 = 3
    want = 3 * (5 - 3 * (1 + math.sqrt(5)) / 2)
    assert float(lo) <= want <= float(hi)
    for e in res.entries:
        assert e.lo <= e.hi
        assert float(e.lo) <= 1 / math.sqrt(5) * 1.2


def test_probe_sqrt2_limit():
    res = probe_omega(sqrt2(), 0, 24)
    assert res.verdict == CONSISTENT
    # q_i Delta_i -> 1/(2 sqrt 2) from an independent high-precision run
    last = res.entries[-1]
    assert float(last.lo) <= 0.35355339059327379 <= float(last.hi) * (1 + 1e-9)


def test_probe_liouville_witness_stops_at_bit_budget():
    res = probe_omega(make_liouville(2), 2, 24)
    assert res.verdict == WITNESS
    assert 2 < res.i_max < 24
    assert len(res.witnesses) == res.trend_depth


def test_probe_liouville_sigma1_in_larger_class():
    # Delta_i ~ 1/(i q_i^2), so Delta_i q_i^3 grows: consistent with Omega(2)
    assert probe_omega(make_liouville(1), 2, 24).verdict == CONSISTENT


def test_probe_rejects_rational():
    with pytest.raises(AlphaSpecError):
        probe_omega(rational(1, 3), 0, 10)
