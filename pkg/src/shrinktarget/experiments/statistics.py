"""Float statistics over certified rational orbits: Kim's liminf and the logarithm law.

The orbit n alpha (mod 1) is replaced by the residues n p_I mod q_I of a
convergent with q_I * N < 2^62, so every residue is an exact int64.  The
error per point is n / (q_I q_{I+1}) from the convergent plus a few ulps
from the float division; each report states the resulting budget.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Sequence

import numpy as np

from .. import cf_engine as cf
from ..alpha_factory import AlphaSpec
from ..exact import QuadraticSurd
from .report import COMPLETED, Report

INT64_SAFE = 1 << 62
ULP = 2.0 ** -52


def draw_samples(seed: int, count: int) -> list[Fraction]:
    """Uniform points of [0, 1) from PCG64(seed); floats are exact dyadic rationals."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return [Fraction(float(v)) for v in rng.random(count)]


def decade_checkpoints(N: int) -> list[int]:
    out, n = [], 10
    while n < N:
        out.append(n)
        n *= 10
    out.append(N)
    return out


class OrbitResidues:
    """frac(n alpha) for n = 1..N as float64, from an int64-safe convergent."""

    def __init__(self, alpha: AlphaSpec, N: int):
        pq = alpha.quotients()
        self.N = N
        if pq.is_finite:
            c = cf.convergents(pq, pq.length)[-1]
            self.p, self.q, self.step_err = c.p % c.q, c.q, 0.0
            self.index = None
            return
        I = 0
        while True:
            try:
                q = cf.denominators(pq, I + 3)
            except cf.DepthExceeded:
                break
            if q[I + 1] * N >= INT64_SAFE:
                break
            I += 1
        convs = cf.convergents(pq, I + 2)
        self.index = I
        self.p, self.q = convs[I].p % convs[I].q, convs[I].q
        self.step_err = 1.0 / (convs[I].q * convs[I + 1].q)

    def fractions(self) -> np.ndarray:
        n = np.arange(1, self.N + 1, dtype=np.int64)
        return ((n * self.p) % self.q).astype(float) / float(self.q)

    def abs_error(self) -> np.ndarray:
        """Per-n bound on |computed - true| for ||n alpha - s||."""
        n = np.arange(1, self.N + 1, dtype=float)
        return n * self.step_err + 3 * ULP

    def budget(self) -> dict:
        return {"q_I": self.q, "convergent_index": self.index, "max_abs_error": self.N * self.step_err + 3 * ULP}


def _circle_norm(x: np.ndarray) -> np.ndarray:
    x = np.mod(x, 1.0)
    return np.minimum(x, 1.0 - x)


def kim_statistic(alpha: AlphaSpec, samples: Sequence, N: int, *, threshold=0.05, threads: int = 1,
                  checkpoints: Sequence[int] | None = None) -> Report:
    """Running minima of n ||n alpha - s|| for each sample s.

    Besides the full running minimum, each row carries the tail minimum over
    sqrt(N) < n <= N, the finite-N proxy for the liminf.
    """
    if alpha.is_rational:
        raise ValueError("kim_statistic needs an irrational alpha")
    orbit = OrbitResidues(alpha, N)
    fr = orbit.fractions()
    err = orbit.abs_error()
    n = np.arange(1, N + 1, dtype=float)
    cps = list(checkpoints or decade_checkpoints(N))
    tail_start = math.isqrt(N)  # n > sqrt(N)
    thr = float(threshold)

    def one(item):
        k, s = item
        v = n * _circle_norm(fr - float(s))
        run = np.minimum.accumulate(v)
        tail = float(v[tail_start:].min()) if tail_start < N else float(v[-1])
        stat_err = float((n * err)[int(np.argmin(v))])
        row = {"sample": k, "s": Fraction(s), "s_float": float(s), "min": float(run[-1]), "tail_min": tail,
               "argmin": int(np.argmin(v)) + 1, "below": bool(run[-1] < thr), "stat_error": stat_err}
        for c in cps:
            row[f"min@{c}"] = float(run[c - 1])
        return row

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as ex:
        rows = list(ex.map(one, enumerate(samples)))
    frac = sum(r["below"] for r in rows) / len(rows) if rows else 0.0
    summary = {"fraction_below": frac, "threshold": thr, "orbit": orbit.budget(),
               "ulp_budget": "3 ulp per residue plus n/(q_I q_{I+1})", "tail_start": tail_start + 1}
    cols = ["sample", "s", "s_float", "min", "tail_min", "argmin", "below", "stat_error"] + [f"min@{c}" for c in cps]
    params = {"N": N, "threshold": threshold, "samples": len(rows), "checkpoints": cps}
    return Report("kim", alpha.text, params, rows, COMPLETED, summary, cols)


def loglaw_estimate(alpha: AlphaSpec, xs: Sequence, N: int, *, threads: int = 1,
                    checkpoints: Sequence[int] | None = None) -> Report:
    """sup over 2 <= n <= N of -ln||x + n alpha|| / ln n, with the tail sup over n > sqrt(N)."""
    if alpha.is_rational:
        raise ValueError("loglaw_estimate needs an irrational alpha")
    orbit = OrbitResidues(alpha, N)
    fr = orbit.fractions()[1:]  # n = 2..N
    err = orbit.abs_error()[1:]
    n = np.arange(2, N + 1, dtype=float)
    logn = np.log(n)
    cps = list(checkpoints or decade_checkpoints(N))
    tail_from = math.isqrt(N) + 1

    def one(item):
        k, x = item
        d = _circle_norm(fr + float(x))
        with np.errstate(divide="ignore"):
            v = np.where(d > 0, -np.log(d) / logn, -np.inf)
        run = np.maximum.accumulate(v)
        tail = v[tail_from - 2:]
        hit = int(np.argmax(tail)) + tail_from - 2
        # first-order effect of the residue error on the ratio at the maximiser
        contam = float(err[hit] / (d[hit] * logn[hit])) if d[hit] > 0 else math.inf
        row = {"sample": k, "x": Fraction(x), "x_float": float(x), "sup": float(run[-1]),
               "tail_sup": float(tail.max()), "tail_argmax": hit + 2, "stat_error": contam}
        for c in cps:
            row[f"sup@{c}"] = float(run[c - 2]) if c >= 2 else None
        return row

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as ex:
        rows = list(ex.map(one, enumerate(xs)))
    summary = {"orbit": orbit.budget(), "tail_from": tail_from}
    cols = ["sample", "x", "x_float", "sup", "tail_sup", "tail_argmax", "stat_error"] + [f"sup@{c}" for c in cps]
    return Report("loglaw", alpha.text, {"N": N, "samples": len(rows), "checkpoints": cps}, rows, COMPLETED,
                  summary, cols)


def convergent_products(alpha: AlphaSpec, i_max: int) -> list[tuple[int, float]]:
    """(q_i, q_i Delta_i) for i < i_max, exact for quadratic alpha, else from refined enclosures."""
    pq = alpha.quotients()
    out = []
    for i in range(i_max):
        q = cf.denominators(pq, i + 2)[i]
        ex = cf.delta_exact(pq, i)
        if isinstance(ex, QuadraticSurd):
            out.append((q, float(ex * q)))
        else:
            lo, hi = cf.delta_refined(pq, i, 2)
            out.append((q, float((lo + hi) / 2 * q)))
    return out
