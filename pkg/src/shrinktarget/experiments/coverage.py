"""Coverage of the circle by orbit-centred balls: the positive side of the theory."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .. import cf_engine as cf
from .. import torus_measure as tm
from ..alpha_factory import AlphaSpec, probe_omega
from ..exact import Root, as_fraction
from ..targets import RadiusSequence
from .report import ETA_REACHED, FAIL, NOT_REACHED, PASS, REDIRECT, UNRESOLVED, Report


class HypothesisError(ValueError):
    pass


def probed_constant(alpha: AlphaSpec, sigma, i_max: int = 24, **kw) -> Fraction:
    """Certified lower end of the probed inf of Delta_i q_i^(1+sigma)."""
    return probe_omega(alpha, sigma, i_max, **kw).inf_statistic[0]


def epsilon_for(C: Fraction, s: Fraction, bits: int = 64) -> Fraction:
    """eps = (C/4)^(1/s) / 2, rounded down to a dyadic rational."""
    lo, _ = Root.power(Fraction(C) / 4, 1 / Fraction(s)).bounds(bits)
    return lo / 2


def geometric_checkpoints(n_max: int, factor: int = 2) -> list[int]:
    out, n = [], 1
    while n < n_max:
        out.append(n)
        n *= factor
    out.append(n_max)
    return out


def coverage_probe(alpha: AlphaSpec, seq: RadiusSequence, s, *, epsilon=None, budget: int = 100_000,
                   C=None, sigma=None, mc_samples: int = 0, seed: int = 0, stop_at_eta: bool = False) -> Report:
    """Inner/outer measures of the union of B(x_n, r_n), n <= N, at geometric N up to ``budget``.

    C defaults to the probed constant at sigma = s - 1, eps to (C/4)^(1/s)/2,
    and the target is eta = eps / 64.
    """
    s = as_fraction(s)
    sigma = s - 1 if sigma is None else as_fraction(sigma)
    C = probed_constant(alpha, sigma) if C is None else as_fraction(C)
    limit = Root.power(C / 4, 1 / s)
    if epsilon is None:
        epsilon = epsilon_for(C, s)
    epsilon = as_fraction(epsilon)
    if not (0 < epsilon and limit > epsilon):
        raise ValueError(f"epsilon must lie in (0, (C/4)^(1/s)) = (0, {float(limit):.6g})")
    eta = epsilon / 64
    points = tm.orbit_points(alpha, budget)
    radii = seq.radii(budget)
    outer_balls = tm.inflated_arcs(points, radii, tm.OUTER)
    # inner drops empty balls, so index the inner list by n
    inner_by_n = {}
    for pt, r in zip(points, radii):
        lo = r if isinstance(r, Fraction) else r[0]
        if lo - pt.err > 0:
            inner_by_n[pt.n] = (pt.center, lo - pt.err)
    checkpoints, reached_at = [], None
    for N in geometric_checkpoints(budget):
        inner = tm.balls_union([inner_by_n[n] for n in range(N + 1) if n in inner_by_n]).measure
        outer = tm.balls_union(outer_balls[: N + 1]).measure
        errsum = 2 * sum(pt.err for pt in points[: N + 1])
        checkpoints.append({"N": N, "inner": inner, "outer": outer, "inner_float": float(inner),
                            "outer_float": float(outer), "gap_bound": errsum})
        if reached_at is None and inner >= eta:
            reached_at = N
            if stop_at_eta:
                break
    summary = {"C": C, "epsilon": epsilon, "eta": eta, "N0": reached_at,
               "orbit_precision_q": tm.orbit_model(alpha, budget).q}
    if mc_samples:
        N = checkpoints[-1]["N"]
        centers = [float(p.center) for p in points[: N + 1]]
        rf = [seq.value(n) for n in range(N + 1)]
        est, se = tm.monte_carlo_measure(centers, rf, mc_samples, np.random.Generator(np.random.PCG64(seed)))
        mid = float(checkpoints[-1]["inner"] + checkpoints[-1]["outer"]) / 2
        summary["monte_carlo"] = {"N": N, "estimate": est, "stderr": se,
                                  "z": (est - mid) / se if se > 0 else 0.0}
    verdict = ETA_REACHED if reached_at is not None else NOT_REACHED
    params = {"seq": seq.text, "s": s, "sigma": sigma, "budget": budget}
    return Report("coverage", alpha.text, params, checkpoints, verdict, summary,
                  ["N", "inner", "outer", "inner_float", "outer_float", "gap_bound"])


def verify_ez_lemma(alpha: AlphaSpec, i: int, epsilon, *, orbit_budget: int = 200_000) -> Report:
    """Constant radius eps * lo(Delta_{i-1}) on x_0 .. x_{q_i - 1}; certify the union has measure >= eps.

    Using the enclosure's lower end keeps the radius computable; spacing
    keeps the balls disjoint, so the measure is 2 q_i eps lo(Delta_{i-1}),
    which is at least eps because q_i >= q_{i-1}.
    """
    epsilon = as_fraction(epsilon)
    if not (0 < epsilon < Fraction(1, 2)):
        raise ValueError("epsilon must lie in (0, 1/2)")
    if i < 1:
        raise ValueError("i must be >= 1")
    pq = alpha.quotients()
    q = cf.denominators(pq, i + 1)
    if q[i] > orbit_budget:
        raise tm.OrbitBudgetError(f"q_{i} = {q[i]} exceeds orbit budget {orbit_budget}")
    d = cf.delta_bounds(pq, i - 1)
    r = epsilon * d.lo
    points = tm.orbit_points(alpha, q[i] - 1)
    m = tm.certified_measure(points, [r] * len(points))
    value = m.exact if m.exact is not None else m.inner
    if value >= epsilon:
        verdict = PASS
    elif m.outer < epsilon:
        verdict = FAIL
    else:
        verdict = UNRESOLVED
    row = {"i": i, "q_i": q[i], "radius": r, "inner": m.inner, "outer": m.outer, "exact": m.exact,
           "measure_float": float(value), "epsilon": epsilon}
    return Report("ez-lemma", alpha.text, {"i": i, "epsilon": epsilon}, [row], verdict,
                  {"exact_measure": m.exact, "disjoint": m.exact is not None})


# --- small-radius regime trace ------------------------------------------------------------

def _count_pairs(balls: list[tuple[Fraction, Fraction]]) -> int:
    """Brute-force count of intersecting pairs among closed balls on the circle."""
    n = 0
    for (c1, r1), (c2, r2) in itertools.combinations(balls, 2):
        if tm.circle_distance(c1, c2) <= r1 + r2:
            n += 1
    return n


def _disjoint(balls: list[tuple[Fraction, Fraction]]) -> bool:
    """Sorted-neighbour test: closed arcs are pairwise disjoint iff consecutive ones are."""
    if len(balls) < 2:
        return True
    order = sorted(balls)
    for (c1, r1), (c2, r2) in zip(order, order[1:] + order[:1]):
        if tm.circle_distance(c1, c2) <= r1 + r2:
            return False
    return True


def _verdict_delta(pq, i: int, rel: str, x) -> str:
    v, _ = cf.check_delta(pq, i, rel, x)
    return v


def validate_case2_trace(alpha: AlphaSpec, seq: RadiusSequence, s, *, epsilon=None, depth: int = 3, C=None,
                         pair_cap: int = 5000, j_samples: int = 8, brute_cap: int = 400) -> Report:
    """Check the small-radius regime inequalities along the doubling subsequence i_m, 1 <= m <= depth.

    All indices refer to |alpha - round(alpha)|, whose orbit coincides with
    that of alpha.  C defaults to the certified probe over every k >= 1
    (i_min = 0), capped below 1, and eps to (C/4)^(1/s)/2.
    """
    s = as_fraction(s)
    npq = cf.normalize(alpha.quotients())
    nalpha = alpha.with_normalization(True)
    if C is None:
        C = min(probed_constant(nalpha, s - 1, i_min=0), Fraction(99, 100))
    C = as_fraction(C)
    epsilon = epsilon_for(C, s) if epsilon is None else as_fraction(epsilon)
    sub = cf.build_im_subsequence(alpha.quotients(), depth + 3)
    while len(sub.indices) < depth + 2:
        sub = cf.build_im_subsequence(alpha.quotients(), len(sub.q) + 4)
    idx, q = sub.indices, sub.q
    i_top = idx[depth + 1]
    params = {"seq": seq.text, "s": s, "epsilon": epsilon, "C": C, "depth": depth}

    # hypothesis gate over 1 <= i <= i_{depth+1}
    gate = []
    for i in range(1, i_top + 1):
        r_lo, r_hi = seq.bounds(q[i] - 1)
        case2 = _verdict_delta(npq, i - 1, ">", 4 * r_hi / epsilon)
        if case2 == PASS:
            gate.append({"i": i, "case": 2})
            continue
        case1 = _verdict_delta(npq, i - 1, "<=", 4 * r_lo / epsilon)
        gate.append({"i": i, "case": 1 if case1 == PASS else None})
        if case1 == PASS:
            return Report("case2-trace", alpha.text, params, gate, REDIRECT,
                          {"case1_index": i, "hint": "run ez-lemma at this index"})
        return Report("case2-trace", alpha.text, params, gate, UNRESOLVED, {"undecided_index": i})

    rows, verdicts = [], []
    pts = tm.orbit_points(npq, q[i_top] - 1)

    def pball(n: int, inflate: str) -> tuple[Fraction, Fraction]:
        lo, hi = seq.power_bounds(n, s)
        rho = lo - pts[n].err if inflate == tm.INNER else hi + pts[n].err
        return pts[n].center, max(rho, Fraction(0))

    for m in range(1, depth + 1):
        a, b = idx[m], idx[m + 1]
        qa, qb, K = q[a], q[b], sub.K[m]
        block = range(qa, qb)
        # (a) r_N^s < Delta_{i_{m+1}-1} / 4, checked at the largest radius N = q_{i_m}
        _, p_hi = seq.power_bounds(qa, s)
        v36 = _verdict_delta(npq, b - 1, ">", 4 * p_hi)
        outer = [pball(N, tm.OUTER) for N in block]
        disjoint = _disjoint(outer)
        n_pairs = _count_pairs(outer) if len(outer) <= brute_cap else (0 if disjoint else None)
        v_disj = PASS if disjoint else UNRESOLVED
        # (b) intersecting pairs n < q_{i_m} <= N force r_n >= (eps/4) Delta_{i_m - 1}
        checked, v37 = 0, PASS
        early = [pball(n, tm.OUTER) for n in range(qa)]
        for N, bN in zip(block, outer):
            for n, bn in enumerate(early):
                if checked >= pair_cap:
                    break
                if tm.circle_distance(bn[0], bN[0]) > bn[1] + bN[1]:
                    continue
                checked += 1
                r_lo, _ = seq.bounds(n)
                v = _verdict_delta(npq, a - 1, "<=", 4 * r_lo / epsilon)
                if v != PASS:
                    v37 = FAIL if v == FAIL else (UNRESOLVED if v37 == PASS else v37)
        # (c) L-counting against B_{jm}, j sampled evenly from 1..K_m - 1
        js = list(range(1, K))
        if len(js) > j_samples:
            step = len(js) / j_samples
            js = sorted({js[int(t * step)] for t in range(j_samples)})
        v38, worst_L = PASS, 0
        for j in js:
            fam = range(j * qa, (j + 1) * qa)
            fam_out = [pball(k, tm.OUTER) for k in fam]
            fam_in = [pball(k, tm.INNER) for k in fam]
            for n in range(qa):
                bo, bi = early[n], pball(n, tm.INNER)
                L_hi = sum(tm.circle_distance(bo[0], c) <= bo[1] + r for c, r in fam_out)
                if L_hi <= 1:
                    continue
                L_lo = sum(tm.circle_distance(bi[0], c) <= bi[1] + r for c, r in fam_in if r > 0)
                worst_L = max(worst_L, L_hi)
                p_lo, p_hi = seq.power_bounds(n, s)
                v_hi = _verdict_delta(npq, a - 1, "<=", 4 * p_lo / (L_hi - 1))
                if v_hi == PASS:
                    continue
                if L_lo > 1 and _verdict_delta(npq, a - 1, ">", 4 * p_hi / (L_lo - 1)) == PASS:
                    v38 = FAIL
                elif v38 == PASS:
                    v38 = UNRESOLVED
        row = {"m": m, "i_m": a, "i_m1": b, "K_m": K, "q_i_m": qa, "q_i_m1": qb,
               "small_power_radius": v36, "disjoint": v_disj, "intersections": n_pairs,
               "pairs_checked": checked, "intersection_bound": v37, "j_sampled": js, "max_L": worst_L,
               "count_bound": v38}
        rows.append(row)
        verdicts += [v36, v_disj, v37, v38]
    if FAIL in verdicts:
        verdict = FAIL
    elif UNRESOLVED in verdicts:
        verdict = UNRESOLVED
    else:
        verdict = PASS
    summary = {"indices": list(idx[: depth + 2]), "gate": gate}
    return Report("case2-trace", alpha.text, params, rows, verdict, summary)
