"""Block measures for the Liouville counterexample: divergent power sums, summable measures."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .. import cf_engine as cf
from .. import torus_measure as tm
from ..alpha_factory import AlphaSpec
from ..exact import as_fraction
from ..targets import Prop21Blocks, prop21_sequence
from .report import FAIL, PASS, Report


def block_outer_measure(blocks: Prop21Blocks, n: int, *, x0=0, budget: int = 200_000) -> dict:
    """Certified outer measure of the union of B(x0 - l alpha, R_n) over block n.

    Small blocks are enumerated point by point.  Otherwise write
    l = j + k Q_n with j < Q_n and k <= P = (U_n - 1) // Q_n; then
    ||l alpha - j alpha|| <= P hi(Delta_i), so the block lies in the union of
    B(x0 - j alpha, rho) with rho = R_n + P hi(Delta_i).  That cover is
    enumerated when Q_n fits the budget.  Beyond it, the Q_n centres are
    spaced at least lo(Delta_{i-1}) apart, so 2 rho < lo(Delta_{i-1})
    makes the balls disjoint with measure exactly Q_n 2 rho; otherwise
    Q_n 2 rho is still an upper bound by subadditivity.
    """
    b = blocks.blocks[n - 1]
    pq = blocks.alpha.quotients()
    x0 = as_fraction(x0)
    if b.size <= budget:
        pts = tm.orbit_points(pq, b.U - 1, x0=x0, sign=-1)[b.U_prev:]
        m = tm.union_measure(pts, [b.R] * len(pts), tm.OUTER)
        return {"method": "enumerated", "outer": m, "points": b.size}
    d = cf.delta_bounds(pq, b.index)
    P = (b.U - 1) // b.Q
    rho = b.R + P * d.hi
    if b.Q <= budget:
        pts = tm.orbit_points(pq, b.Q - 1, x0=x0, sign=-1)
        m = tm.union_measure(pts, [rho] * len(pts), tm.OUTER)
        return {"method": "cover-enumerated", "outer": m, "points": b.Q, "rho": rho}
    spacing = cf.delta_bounds(pq, b.index - 1).lo
    m = min(Fraction(1), b.Q * 2 * rho)
    method = "cover-disjoint" if 2 * rho < spacing else "cover-subadditive"
    return {"method": method, "outer": m, "points": b.Q, "rho": rho}


def counterexample_verify(alpha: AlphaSpec, s, n_max: int, *, x0=0, budget: int = 200_000,
                          threads: int = 1) -> Report:
    """Per block n: outer measure <= 4/n^2 and power sum >= the certified constant."""
    s = as_fraction(s)
    blocks = prop21_sequence(alpha, s, n_max)
    const_lo, const_hi = blocks.const_bounds()

    def one(n: int) -> dict:
        b = blocks.blocks[n - 1]
        meas = block_outer_measure(blocks, n, x0=x0, budget=budget)
        bound = Fraction(4, n * n)
        ps_lo, ps_hi = blocks.block_power_sum(n)
        ok_measure = meas["outer"] <= bound
        ok_sum = ps_lo >= const_lo and const_lo > 0
        return {"n": n, "Q_n": b.Q, "convergent_index": b.index, "U_prev": b.U_prev, "U_n": b.U,
                "R_n": b.R, "outer_measure": meas["outer"], "outer_float": float(meas["outer"]),
                "bound": bound, "method": meas["method"], "power_sum_lo": ps_lo, "power_sum_hi": ps_hi,
                "measure_ok": ok_measure, "power_sum_ok": ok_sum}

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as ex:
        rows = list(ex.map(one, range(1, n_max + 1)))
    verdict = PASS if all(r["measure_ok"] and r["power_sum_ok"] for r in rows) else FAIL
    summary = {"const": const_lo, "const_float": float(const_lo), "Q": blocks.Q,
               "measure_sum_bound": sum(Fraction(4, n * n) for n in range(1, n_max + 1))}
    cols = ["n", "Q_n", "convergent_index", "U_prev", "U_n", "R_n", "outer_measure", "outer_float", "bound",
            "method", "power_sum_lo", "power_sum_hi", "measure_ok", "power_sum_ok"]
    return Report("counterexample", alpha.text, {"s": s, "n_max": n_max, "x0": as_fraction(x0)},
                  rows, verdict, summary, cols)
