from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from shrinktarget import cf_engine as cf
from shrinktarget.alpha_factory import golden, make_liouville, sqrt2
from shrinktarget.exact import Root
from shrinktarget.targets import (
    BOUNDED,
    GROWING,
    ConstantSequence,
    ListSequence,
    LogLawSequence,
    NoAdmissibleQ,
    PowerSequence,
    SequenceError,
    check_condition_star,
    classify_trend,
    index_gauge,
    loglaw_power_sum_oracle,
    minimal_scale,
    monotonicity_scan,
    parse_sequence,
    partial_power_sum,
    prop21_sequence,
    prop61_geometric_bound,
    prop61_majorant,
    prop62_gauge,
    prop62_sequence,
)

# sum_{n=2}^{N} 1/(n ln n), plain float summation in an independent loop
INV_NLOGN = {10: 1.6499075371627214, 1000: 2.7273957479724786, 10 ** 6: 3.4204705961202957}


def test_power_sequence_harmonic_sum():
    # (2 * n^-1/2 / 2)^2 = 1/n: the s = 2 sum is the harmonic number H_N
    seq = parse_sequence("power:c=1/2,beta=1/2")
    ps = partial_power_sum(seq, 2, 10_000)
    assert ps.exact
    assert float(ps.value) == pytest.approx(9.78760603604438, rel=1e-14)


@pytest.mark.parametrize("N,want", sorted(INV_NLOGN.items()))
def test_loglaw_power_sum_matches_direct(N, want):
    ps = partial_power_sum(LogLawSequence(Fraction(2)), 2, N, first=2)
    assert float(ps.value) == pytest.approx(4 * want, rel=1e-9)
    assert loglaw_power_sum_oracle(2, N) == pytest.approx(4 * want, rel=0.05)


@given(st.fractions(min_value=Fraction(1, 100), max_value=1, max_denominator=1000),
       st.fractions(min_value=0, max_value=3, max_denominator=12))
def test_power_sequence_monotone(c, beta):
    seq = PowerSequence(c, beta)
    assert monotonicity_scan(seq, 300) is None
    for n in (1, 7, 50):
        lo, hi = seq.bounds(n)
        assert lo <= hi
        assert float(lo) <= float(c) * n ** -float(beta) * (1 + 1e-12)


class _Bump(ConstantSequence):
    def exact(self, n: int):
        return Fraction(1, 2) if n == 3 else Fraction(1, n + 1)


def test_monotonicity_scan_detects_increase():
    assert monotonicity_scan(_Bump(Fraction(0)), 50) == 2


def test_list_sequence_rejects_increase():
    with pytest.raises(SequenceError):
        ListSequence((Fraction(1, 2), Fraction(1, 3), Fraction(1, 2)), "test")


def test_constant_sequence():
    seq = parse_sequence("const:r=1/10")
    assert isinstance(seq, ConstantSequence)
    assert seq.exact(99) == Fraction(1, 10)


def test_parse_sequence_forms(tmp_path):
    f = tmp_path / "r.csv"
    f.write_text("1/2\n1/3\n1/5\n")
    seq = parse_sequence(f"file:{f}")
    assert [seq.exact(n) for n in (1, 2, 3)] == [Fraction(1, 2), Fraction(1, 3), Fraction(1, 5)]
    assert parse_sequence("loglaw:s=3").text == "loglaw:s=3"
    d = parse_sequence("delta:eps=1/10,alpha=quadratic:0,1,2")
    assert d.alpha == sqrt2()
    with pytest.raises(SequenceError):
        parse_sequence("zigzag:x=1")


def test_prop21_liouville_blocks():
    b = prop21_sequence(make_liouville(2), 2, 3)
    assert b.Q[:2] == [2, 1460]
    assert [x.U for x in b.blocks][:2] == [4, 34105600]
    assert b.const == Fraction(1, 2)


def test_prop21_admissibility_recomputed():
    # q_{i+1} >= 2 n^(2s+2) q_i^sigma and Q_{n+1} >= 2 Q_n, checked with integers for s = sigma = 2
    b = prop21_sequence(make_liouville(2), 2, 5)
    pq = make_liouville(2).quotients()
    for n, blk in enumerate(b.blocks, start=1):
        q = cf.denominators(pq, blk.index + 2)
        assert q[blk.index] == blk.Q
        assert q[blk.index + 1] >= 2 * n ** 6 * blk.Q ** 2
        assert blk.U == (n * n * blk.Q) ** 2
        assert blk.R == Fraction(1, n * n * blk.Q)
    assert all(b2 >= 2 * b1 for b1, b2 in zip(b.Q, b.Q[1:]))


def test_prop21_golden_has_no_admissible_q():
    with pytest.raises(NoAdmissibleQ):
        prop21_sequence(golden(), 2, 2)


def test_prop62_thresholds_recomputed():
    # s = 2: delta(t_n) = n^(1/6), so t_{n+1} = floor(t_n^2 sqrt(n)) + 1
    seq = prop62_sequence(2, 6)
    t = [1]
    for n in range(1, 6):
        t.append(math.isqrt(t[-1] ** 4 * n) + 1)
    assert list(seq.scale.t) == t
    assert t[:5] == [1, 2, 6, 63, 7939]
    assert seq.scale.valid
    assert all(seq.block_bound_holds(m) for m in range(1, 7))


@given(st.integers(2, 4), st.integers(1, 5))
def test_minimal_scale_is_admissible(s, t1):
    spec = minimal_scale(s, index_gauge, 6, t1)
    assert spec.valid
    # one less at any step breaks admissibility
    for i in range(5):
        assert spec.t[i + 1] == spec.threshold(i) + 1


@given(st.fractions(min_value=Fraction(7, 6), max_value=4, max_denominator=6))
def test_prop62_block_sums(s):
    seq = prop62_sequence(s, 7)
    for m, (lo, hi) in enumerate(seq.block_power_sums(), start=1):
        assert lo <= hi
        assert float(lo) <= m ** -float((s + 1) / 2) * (1 + 1e-12)


def test_condition_star_loglaw_bounded():
    seq = LogLawSequence(Fraction(2))
    spec = minimal_scale(2, index_gauge, 8, 2)
    rep = check_condition_star(seq, spec, 8)
    assert rep.trend == BOUNDED
    major = prop61_majorant(2, spec.t)
    assert all(a <= b * (1 + 1e-12) for a, b in zip(rep.terms, major))
    assert sum(major) <= prop61_geometric_bound(2)


def test_condition_star_prop62_growing():
    seq = prop62_sequence(2, 12)
    rep = check_condition_star(seq, seq.scale, 12)
    assert rep.trend == GROWING
    assert rep.terms[:4] == pytest.approx([1, 1 / 2, 1 / 3, 1 / 4], rel=1e-9)


@given(st.floats(0.3, 3.0))
def test_classify_trend_power_laws(p):
    idx = list(range(1, 200))
    trend, slope = classify_trend(idx, [k ** -p for k in idx])
    assert slope == pytest.approx(p, rel=1e-6)
    if p <= 1.0:
        assert trend == GROWING
    if p >= 1.5:
        assert trend == BOUNDED


def test_prop21_block_sums_bracketed():
    b = prop21_sequence(make_liouville(2), 2, 5)
    lo_c, _ = b.const_bounds()
    total = Fraction(0)
    for n in range(1, 6):
        lo, hi = b.block_power_sum(n)
        assert lo_c <= lo and hi <= 2 * b.const
        total += lo
    # every block adds at least const, so the partial sums grow linearly
    assert total >= 5 * lo_c


@given(st.integers(2, 3), st.integers(1, 4), st.integers(0, 4))
def test_condition_star_lowering_breaks_validity(s, t1, k):
    spec = minimal_scale(s, index_gauge, 6, t1)
    t = list(spec.t)
    t[k + 1] = spec.threshold(k)  # t_{i+1} = t_i^s delta^{s+1} exactly fails strictness
    broken = type(spec)(spec.s, tuple(t), spec.delta)
    assert k in broken.violations()


@pytest.mark.parametrize("text", ["power:c=1/2,beta=1/2", "loglaw:s=2", "const:r=1/7", "prop62:s=2,depth=6",
                                  "prop21:s=2,n=3,alpha=rule:liouville:sigma=2",
                                  "delta:eps=1/10,alpha=quadratic:1,2,5"])
def test_families_monotone_first_10k(text):
    assert monotonicity_scan(parse_sequence(text), 10_000) is None
