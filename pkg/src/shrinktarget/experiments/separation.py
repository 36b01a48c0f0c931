"""Two radius families that separate divergent power sums from condition (*)."""

from __future__ import annotations

import math
from fractions import Fraction

from ..exact import as_fraction
from ..targets import (
    BOUNDED,
    GROWING,
    LogLawSequence,
    check_condition_star,
    classify_trend,
    index_gauge,
    loglaw_power_sum_oracle,
    minimal_scale,
    partial_power_sum,
    prop61_geometric_bound,
    prop61_majorant,
    prop62_sequence,
)
from .report import FAIL, PASS, SKIPPED, Report
from .statistics import decade_checkpoints

COLUMNS = ["panel", "series", "index", "term", "partial_sum", "reference"]


def zeta_upper(p: float, M: int = 64) -> float:
    """Upper bound for sum_{m>=1} m^-p (p > 1): head sum plus Euler-Maclaurin tail with remainder slack."""
    head = math.fsum(m ** -p for m in range(1, M))
    tail = M ** (1 - p) / (p - 1) + M ** -p / 2 + p * M ** (-p - 1) / 12
    slack = p * (p + 1) * (p + 2) * M ** (-p - 3) / 720
    return head + tail + slack


def separation_demo(s, N: int = 10 ** 6, *, depth: int = 12, scale_terms: int = 8, t1: int = 2) -> Report:
    """Panel (i): loglaw radii, growing power sums against bounded condition-(*) sums.
    Panel (ii): the block sequence built along a condition-(*) scale, the other way round.
    """
    s = as_fraction(s)
    params = {"s": s, "N": N, "depth": depth, "scale_terms": scale_terms}
    if s == 1:
        return Report("separation", None, params, [], SKIPPED,
                      {"note": "for s = 1 the two families coincide; nothing to separate"}, COLUMNS)
    if s < 1:
        raise ValueError("s must be >= 1")
    rows: list[dict] = []

    # panel (i)
    seq = LogLawSequence(s)
    cps = decade_checkpoints(N)
    power_vals, oracle_vals = [], []
    for c in cps:
        ps = partial_power_sum(seq, s, c, first=2)
        orc = loglaw_power_sum_oracle(s, c)
        power_vals.append(float(ps.value))
        oracle_vals.append(orc)
        rows.append({"panel": "i", "series": "power_sum", "index": c,
                     "term": math.exp(float(s) * (math.log(2) + seq.log_value(c))),
                     "partial_sum": float(ps.value), "reference": orc})
    scale = minimal_scale(s, index_gauge, scale_terms, t1)
    star = check_condition_star(seq, scale, scale_terms)
    major = prop61_majorant(s, scale.t)
    geo = prop61_geometric_bound(s)
    acc = 0.0
    for k, (term, ps_) in enumerate(zip(star.terms, star.partial_sums), start=1):
        acc += major[k - 1]
        rows.append({"panel": "i", "series": "star_sum", "index": k, "term": term, "partial_sum": ps_,
                     "reference": acc})
    power_trend, power_p = classify_trend(cps, [r["term"] for r in rows if r["series"] == "power_sum"])
    oracle_rel = max(abs(a - b) / b for a, b in zip(power_vals, oracle_vals))
    panel_i = {
        "power_sum_final": power_vals[-1],
        "oracle_final": oracle_vals[-1],
        "oracle_max_rel_diff": oracle_rel,
        "power_trend": power_trend,
        "power_decay_exponent": power_p,
        "star_sum_final": star.partial_sums[-1],
        "majorant_sum_final": acc,
        "geometric_bound": geo,
        "star_trend": star.trend,
        "scale_bits": [t.bit_length() for t in scale.t],
    }

    # panel (ii)
    p62 = prop62_sequence(s, depth)
    pexp = float((s + 1) / 2)
    cum, cum_major, star_sum = Fraction(0), 0.0, 0.0
    star62 = check_condition_star(p62, p62.scale, depth)
    block_ok = True
    for m, (lo_hi, term) in enumerate(zip(p62.block_power_sums(), star62.terms), start=1):
        cum += lo_hi[1]
        cum_major += m ** -pexp
        star_sum += term
        block_ok = block_ok and p62.block_bound_holds(m)
        rows.append({"panel": "ii", "series": "power_sum", "index": m, "term": float(lo_hi[1]),
                     "partial_sum": float(cum), "reference": cum_major})
        rows.append({"panel": "ii", "series": "star_sum", "index": m, "term": term, "partial_sum": star_sum,
                     "reference": None})
    zeta = zeta_upper(pexp)
    panel_ii = {
        "power_sum_final": float(cum),
        "block_majorant_final": cum_major,
        "zeta_bound": zeta,
        "block_bounds_hold": block_ok,
        "star_sum_final": star_sum,
        "star_trend": star62.trend,
        "star_decay_exponent": star62.slope,
        "threshold_bits": [t.bit_length() for t in p62.thresholds],
    }
    ok = (
        power_trend == GROWING
        and star.partial_sums[-1] <= acc <= geo
        and star.trend == BOUNDED
        and block_ok
        and float(cum) <= zeta
        and star62.trend == GROWING
    )
    summary = {"panel_i": panel_i, "panel_ii": panel_ii}
    return Report("separation", None, params, rows, PASS if ok else FAIL, summary, COLUMNS)
