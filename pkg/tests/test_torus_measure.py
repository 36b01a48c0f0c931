from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shrinktarget import cf_engine as cf
from shrinktarget import torus_measure as tm
from shrinktarget.exact import QuadraticSurd
from shrinktarget.alpha_factory import golden, make_badly_approximable, rational, sqrt2, sqrt3
from shrinktarget.experiments.report import PASS

centers = st.fractions(min_value=0, max_value=1, max_denominator=1000).map(lambda x: x % 1)
radii = st.fractions(min_value=0, max_value=Fraction(1, 3), max_denominator=1000)


def naive_union(balls):
    """Unroll each ball into pieces of [0, 1) and merge; a second, independent sweep."""
    pieces = []
    for c, r in balls:
        if 2 * r >= 1:
            return Fraction(1)
        lo, hi = c - r, c + r
        if lo < 0:
            pieces += [(lo + 1, Fraction(1)), (Fraction(0), hi)]
        elif hi > 1:
            pieces += [(lo, Fraction(1)), (Fraction(0), hi - 1)]
        else:
            pieces.append((lo, hi))
    pieces.sort()
    total, cur = Fraction(0), None
    for lo, hi in pieces:
        if cur is None or lo > cur[1]:
            if cur:
                total += cur[1] - cur[0]
            cur = [lo, hi]
        else:
            cur[1] = max(cur[1], hi)
    if cur:
        total += cur[1] - cur[0]
    return total


@given(st.lists(st.tuples(centers, radii), min_size=1, max_size=25))
def test_balls_union_matches_naive_sweep(balls):
    assert tm.balls_union(balls).measure == naive_union(balls)


@given(st.lists(st.tuples(centers, radii), min_size=1, max_size=15), centers)
def test_union_contains_agrees_with_distance(balls, x):
    u = tm.balls_union(balls)
    inside = any(tm.circle_distance(x, c) <= r for c, r in balls if r > 0)
    assert u.contains(x) == inside


@given(st.lists(st.tuples(centers, radii), min_size=1, max_size=15))
def test_union_subadditive_and_monotone(balls):
    m = tm.balls_union(balls).measure
    assert m <= min(Fraction(1), sum(min(2 * r, Fraction(1)) for _, r in balls))
    assert m >= max(min(2 * r, Fraction(1)) for _, r in balls)
    assert tm.balls_union(balls[:-1]).measure <= m if len(balls) > 1 else True


@given(st.sampled_from([sqrt2, golden, sqrt3]), st.integers(1, 300),
       st.fractions(min_value=Fraction(1, 10 ** 4), max_value=Fraction(1, 20), max_denominator=10 ** 4))
def test_certified_measure_orders(make, n_max, r):
    pts = tm.orbit_points(make(), n_max)
    m = tm.certified_measure(pts, [r] * len(pts))
    assert m.inner <= m.outer
    assert m.outer - m.inner <= 4 * sum(p.err for p in pts) + Fraction(1, 10 ** 12)
    if m.exact is not None:
        assert m.inner <= m.exact <= m.outer


@given(st.sampled_from([sqrt2, golden, sqrt3]), st.integers(1, 2000))
def test_orbit_errors_within_budget(make, n_max):
    pts = tm.orbit_points(make(), n_max)
    assert pts[-1].err <= tm.DEFAULT_ERR_BUDGET
    assert [p.n for p in pts] == list(range(n_max + 1))


def test_orbit_points_close_to_float_orbit():
    pts = tm.orbit_points(sqrt2(), 1000)
    for p in pts[::97]:
        want = (p.n * math.sqrt(2)) % 1
        assert abs(float(p.center) - want) < 1e-9


def test_rational_orbit_is_exact():
    pts = tm.orbit_points(rational(3, 8), 16)
    assert all(p.err == 0 for p in pts)
    assert pts[3].center == Fraction(1, 8)


def test_min_distance_three_gap():
    # among x_0..x_11 for sqrt2 (q_3 = 12) the minimum gap is Delta_2 = 5 sqrt2 - 7
    pts = tm.orbit_points(sqrt2(), 11)
    d = tm.min_pairwise_distance(pts)
    gap = QuadraticSurd(-7, 5, 1, 2)
    assert (gap - d.lo).sign() >= 0 and (gap - d.hi).sign() <= 0


@pytest.mark.parametrize("make", [sqrt2, golden, sqrt3, lambda: make_badly_approximable(2, 7)])
def test_spacing_lemma_exact(make):
    alpha = make()
    pq = alpha.quotients()
    i = 1
    while cf.denominators(pq, i + 1)[i] <= 500:
        r = tm.verify_lemma_spacing(alpha, i)
        assert r["status"] == PASS, r
        i += 1
    assert i > 4


def test_monte_carlo_agrees_with_exact():
    balls = [(Fraction(k, 7), Fraction(1, 30)) for k in range(7)] + [(Fraction(1, 2), Fraction(1, 10))]
    exact = float(tm.balls_union(balls).measure)
    est, se = tm.monte_carlo_measure([float(c) for c, _ in balls], [float(r) for _, r in balls], 200_000,
                                     np.random.Generator(np.random.PCG64(5)))
    assert abs(est - exact) <= 4 * se


def test_circle_distance_symmetric():
    assert tm.circle_distance(Fraction(1, 10), Fraction(9, 10)) == Fraction(1, 5)
    assert tm.circle_distance(Fraction(0), Fraction(1, 2)) == Fraction(1, 2)
