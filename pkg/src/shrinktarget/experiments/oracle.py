"""Regression corpus comparing exact union measures with brute-force Monte Carlo."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import torus_measure as tm
from ..alpha_factory import AlphaSpec, golden, make_badly_approximable, make_liouville, rational, sqrt2, sqrt3
from ..exact import Root
from .report import FAIL, PASS, Report


@dataclass(frozen=True)
class OracleInstance:
    alpha: AlphaSpec
    n_max: int
    c: Fraction
    beta: Fraction
    x0: Fraction

    def radius(self, n: int):
        """c (n+1)^-beta as an exact Fraction, or a dyadic (lo, hi) pair."""
        r = Root.power(n + 1, -self.beta) * self.c
        e = r.exact()
        return e if e is not None else r.bounds(64)


def oracle_corpus(seed: int = 0, size: int = 20) -> list[OracleInstance]:
    rng = np.random.Generator(np.random.PCG64(seed))
    alphas = [sqrt2(), golden(), sqrt3(), make_badly_approximable(2, 7), make_liouville(1), rational(3, 8)]
    betas = [Fraction(0), Fraction(1, 2), Fraction(1)]
    out = []
    for k in range(size):
        a = alphas[k % len(alphas)]
        n_max = int(rng.integers(5, 200))
        beta = betas[int(rng.integers(0, 3))]
        # scale c so the total length sum 2 r_n lands roughly in (0.1, 1.2)
        spread = {Fraction(0): n_max + 1, Fraction(1, 2): math.isqrt(n_max + 1), Fraction(1): 1 + int(math.log(n_max + 1))}[beta]
        c = Fraction(int(rng.integers(5, 60)), 100 * spread)
        x0 = Fraction(int(rng.integers(0, 1000)), 1000)
        out.append(OracleInstance(a, n_max, c, beta, x0))
    return out


def oracle_equivalence(corpus: list[OracleInstance] | None = None, *, samples: int = 100_000, seed: int = 0,
                       sigmas: float = 3.0) -> Report:
    """Each instance passes when |MC - exact| <= sigmas * sqrt(p(1-p)/samples)."""
    corpus = oracle_corpus(seed) if corpus is None else corpus
    rng = np.random.Generator(np.random.PCG64(seed + 1))
    rows = []
    for k, inst in enumerate(corpus):
        pts = tm.orbit_points(inst.alpha, inst.n_max, x0=inst.x0)
        radii = [inst.radius(n) for n in range(inst.n_max + 1)]
        m = tm.certified_measure(pts, radii)
        p = m.exact if m.exact is not None else (m.inner + m.outer) / 2
        centers = [float(pt.center) for pt in pts]
        rf = [float(r) if isinstance(r, Fraction) else float((r[0] + r[1]) / 2) for r in radii]
        est, _ = tm.monte_carlo_measure(centers, rf, samples, rng)
        pf = float(p)
        sd = math.sqrt(pf * (1 - pf) / samples)
        # the inner/outer gap is far below one sigma, but count it anyway
        slack = float(m.outer - m.inner)
        ok = abs(est - pf) <= sigmas * sd + slack
        rows.append({"instance": k, "alpha": inst.alpha.text, "n_max": inst.n_max, "c": inst.c, "beta": inst.beta,
                     "x0": inst.x0, "inner": m.inner, "outer": m.outer, "measure_float": pf, "mc_estimate": est,
                     "sigma": sd, "z": (est - pf) / sd if sd > 0 else 0.0, "ok": ok})
    verdict = PASS if all(r["ok"] for r in rows) else FAIL
    return Report("oracle", None, {"samples": samples, "seed": seed, "sigmas": sigmas}, rows, verdict,
                  {"passed": sum(r["ok"] for r in rows), "instances": len(rows)})
