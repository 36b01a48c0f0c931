"""Exact circle arithmetic: certified orbit points, arcs and measures of arc unions.

The circle is [0, 1) with Lebesgue (Haar) measure.  An irrational rotation is
replaced by a convergent p_I/q_I; orbit point n then carries the certified
error n * Delta_I / q_I <= n / (q_I q_{I+1}).  A union of balls is measured
twice: with every ball shrunk by its point's error (``inner``, a certified
subset) and grown by it (``outer``, a certified superset).

Arcs are closed.  Touching arcs merge, which changes no measure.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from . import cf_engine as cf
from .alpha_factory import AlphaSpec
from .exact import dyadic_ceil, dyadic_floor

INNER, OUTER = "inner", "outer"

RadiusLike = Union[int, Fraction, float, tuple]

DEFAULT_ERR_BUDGET = Fraction(1, 1 << 64)


class OrbitBudgetError(ValueError):
    """The requested orbit accuracy or size is out of reach."""


@dataclass(frozen=True)
class OrbitPoint:
    n: int
    center: Fraction
    err: Fraction


@dataclass(frozen=True)
class Arc:
    """Closed arc from ``lo`` going counter-clockwise to ``hi`` (both mod 1)."""

    lo: Fraction
    hi: Fraction

    @classmethod
    def ball(cls, center, radius) -> "Arc":
        center, radius = Fraction(center), Fraction(radius)
        if 2 * radius >= 1:
            return cls(Fraction(0), Fraction(1))
        return cls((center - radius) % 1, (center + radius) % 1)

    @property
    def length(self) -> Fraction:
        if self.lo == 0 and self.hi == 1:
            return Fraction(1)
        return (self.hi - self.lo) % 1

    def pieces(self) -> list[tuple[Fraction, Fraction]]:
        """Non-wrapping pieces inside [0, 1]."""
        if self.length == 1:
            return [(Fraction(0), Fraction(1))]
        if self.lo <= self.hi:
            return [(self.lo, self.hi)]
        return [(self.lo, Fraction(1)), (Fraction(0), self.hi)]


@dataclass(frozen=True)
class ArcUnion:
    """Sorted, disjoint, merged arcs stored as integer spans over one denominator."""

    den: int
    spans: tuple[tuple[int, int], ...]

    @property
    def measure(self) -> Fraction:
        return Fraction(sum(b - a for a, b in self.spans), self.den)

    @property
    def arcs(self) -> list[tuple[Fraction, Fraction]]:
        return [(Fraction(a, self.den), Fraction(b, self.den)) for a, b in self.spans]

    def __len__(self) -> int:
        return len(self.spans)

    def contains(self, x) -> bool:
        x = Fraction(x) % 1
        k = x * self.den
        i = bisect.bisect_right(self.spans, (k, math.inf)) - 1
        return i >= 0 and self.spans[i][0] <= k <= self.spans[i][1]

    @classmethod
    def from_arcs(cls, arcs: Iterable[Arc]) -> "ArcUnion":
        pieces = [pc for arc in arcs for pc in arc.pieces()]
        return _merge_pieces(pieces)


def _lcm_of(dens: Iterable[int]) -> int:
    out = 1
    for d in set(dens):
        out = out * d // math.gcd(out, d)
    return out


def _merge_pieces(pieces: Sequence[tuple[Fraction, Fraction]]) -> ArcUnion:
    if not pieces:
        return ArcUnion(1, ())
    L = _lcm_of(x.denominator for pc in pieces for x in pc)
    spans = sorted((a.numerator * (L // a.denominator), b.numerator * (L // b.denominator)) for a, b in pieces)
    return ArcUnion(L, _merge_int_spans(spans))


def _merge_int_spans(spans: Sequence[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    out: list[list[int]] = []
    for a, b in spans:
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1][1] = b
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


# --- orbits ---------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitModel:
    """alpha replaced by p/q; error of point n is n * err_per_step."""

    p: int
    q: int
    err_per_step: Fraction
    index: int | None

    def point(self, n: int, x0: Fraction = Fraction(0)) -> OrbitPoint:
        c = (x0 + Fraction(n * self.p % self.q, self.q)) % 1
        return OrbitPoint(n, c, abs(n) * self.err_per_step)


def orbit_model(alpha: AlphaSpec | cf.PartialQuotients, n_max: int, *, precision_index: int | None = None,
                err_budget: Fraction = DEFAULT_ERR_BUDGET) -> OrbitModel:
    """Pick the convergent p_I/q_I that keeps n_max * Delta_I / q_I under ``err_budget``."""
    pq = alpha.quotients() if isinstance(alpha, AlphaSpec) else alpha
    if pq.is_finite:
        c = cf.convergents(pq, pq.length)[-1]
        return OrbitModel(c.p, c.q, Fraction(0), None)
    n_max = max(n_max, 1)
    if precision_index is not None:
        convs = cf.convergents(pq, precision_index + 2)
        I = precision_index
    else:
        I, convs = 0, None
        while True:
            try:
                convs = cf.convergents(pq, I + 2)
            except cf.DepthExceeded as exc:
                raise OrbitBudgetError(f"error budget {err_budget} unattainable: {exc}") from None
            if Fraction(n_max, convs[I].q * convs[I + 1].q) <= err_budget:
                break
            I += 1
    step = Fraction(1, convs[I].q * convs[I + 1].q)
    return OrbitModel(convs[I].p, convs[I].q, step, I)


def orbit_points(alpha: AlphaSpec | cf.PartialQuotients, n_max: int, precision_index: int | None = None, *,
                 err_budget: Fraction = DEFAULT_ERR_BUDGET, x0=0, sign: int = 1) -> list[OrbitPoint]:
    """Points x0 + sign * n * alpha (mod 1) for n = 0..n_max with certified errors."""
    model = orbit_model(alpha, n_max, precision_index=precision_index, err_budget=err_budget)
    x0 = Fraction(x0)
    q, p, e = model.q, model.p * sign, model.err_per_step
    return [OrbitPoint(n, (x0 + Fraction(n * p % q, q)) % 1, n * e) for n in range(n_max + 1)]


# --- measures --------------------------------------------------------------------

def _radius_bounds(r: RadiusLike) -> tuple[Fraction, Fraction]:
    if isinstance(r, tuple):
        lo, hi = r
        return Fraction(lo), Fraction(hi)
    if isinstance(r, float):
        # a float radius is an approximation: widen by one ulp each way
        lo = Fraction(math.nextafter(r, 0.0)) if r > 0 else Fraction(0)
        return max(lo, Fraction(0)), Fraction(math.nextafter(r, math.inf))
    x = Fraction(r)
    return x, x


def rationalize_radius(r: float, bits: int, inflate: str) -> Fraction:
    """Dyadic rounding of a float radius: toward zero for inner, away for outer."""
    x = Fraction(r)
    return dyadic_floor(x, bits) if inflate == INNER else dyadic_ceil(x, bits)


def inflated_arcs(points: Sequence[OrbitPoint], radii: Sequence[RadiusLike], inflate: str) -> list[tuple[Fraction, Fraction]]:
    """(center, radius) pairs after shrinking (inner) or growing (outer) by each point's error."""
    if len(points) != len(radii):
        raise ValueError("points and radii must have equal length")
    out = []
    for pt, r in zip(points, radii):
        lo, hi = _radius_bounds(r)
        if lo < 0:
            raise ValueError("radii must be >= 0")
        rho = lo - pt.err if inflate == INNER else hi + pt.err
        if inflate == INNER and rho <= 0:
            continue
        out.append((pt.center, rho))
    return out


def balls_union(balls: Sequence[tuple[Fraction, Fraction]]) -> ArcUnion:
    """Merged union of closed balls B(c, rho) given as exact (center, radius) pairs."""
    balls = [(c, rho) for c, rho in balls if rho > 0]
    if not balls:
        return ArcUnion(1, ())
    if any(2 * rho >= 1 for _, rho in balls):
        return ArcUnion(1, ((0, 1),))
    L = _lcm_of([c.denominator for c, _ in balls] + [rho.denominator for _, rho in balls])
    spans = []
    for c, rho in balls:
        cn = c.numerator * (L // c.denominator)
        rn = rho.numerator * (L // rho.denominator)
        a = (cn - rn) % L
        b = a + 2 * rn
        if b <= L:
            spans.append((a, b))
        else:
            spans.append((a, L))
            spans.append((0, b - L))
    spans.sort()
    return ArcUnion(L, _merge_int_spans(spans))


def arc_union(points: Sequence[OrbitPoint], radii: Sequence[RadiusLike], inflate: str = OUTER) -> ArcUnion:
    if inflate not in (INNER, OUTER):
        raise ValueError("inflate must be 'inner' or 'outer'")
    return balls_union(inflated_arcs(points, radii, inflate))


def union_measure(points: Sequence[OrbitPoint], radii: Sequence[RadiusLike], inflate: str = OUTER) -> Fraction:
    """Exact measure of the union of B(center_n, r_n -/+ err_n)."""
    return arc_union(points, radii, inflate).measure


@dataclass(frozen=True)
class CertifiedMeasure:
    inner: Fraction
    outer: Fraction
    exact: Fraction | None

    def as_tuple(self) -> tuple[Fraction, Fraction]:
        return self.inner, self.outer


def certified_measure(points: Sequence[OrbitPoint], radii: Sequence[RadiusLike]) -> CertifiedMeasure:
    """Inner and outer measures, plus the exact measure when it is determined.

    The true measure is pinned down when all errors vanish, or when the outer
    balls are pairwise disjoint: then the true balls are disjoint too and the
    measure is the sum of their lengths, whatever the exact centers are.
    """
    outer_u = arc_union(points, radii, OUTER)
    inner = union_measure(points, radii, INNER)
    outer = outer_u.measure
    exact = None
    bounds = [_radius_bounds(r) for r in radii]
    if all(lo == hi for lo, hi in bounds):
        if all(pt.err == 0 for pt in points):
            exact = outer
        else:
            outer_sum = sum(min(2 * (hi + pt.err), Fraction(1)) for pt, (_, hi) in zip(points, bounds) if hi + pt.err > 0)
            if outer_u.measure == outer_sum and outer_sum < 1:
                exact = sum(2 * hi for _, hi in bounds)
    return CertifiedMeasure(inner, outer, exact)


def circle_distance(x: Fraction, y: Fraction) -> Fraction:
    d = (x - y) % 1
    return min(d, 1 - d)


@dataclass(frozen=True)
class DistanceInterval:
    lo: Fraction
    hi: Fraction
    value: Fraction
    pair: tuple[int, int]


def min_pairwise_distance(points: Sequence[OrbitPoint]) -> DistanceInterval:
    """Certified enclosure of the minimum circle distance among the true points.

    Sorting the approximate centers finds the closest approximate pair in
    O(n log n); every true distance is within 2 * max(err) of its
    approximation.
    """
    if len(points) < 2:
        raise ValueError("need at least two points")
    order = sorted(points, key=lambda pt: pt.center)
    best, pair = None, None
    for a, b in zip(order, order[1:] + order[:1]):
        d = circle_distance(a.center, b.center)
        if best is None or d < best:
            best, pair = d, (a.n, b.n)
    if len(points) == 2:
        best = circle_distance(points[0].center, points[1].center)
        pair = (points[0].n, points[1].n)
    E = max(pt.err for pt in points)
    return DistanceInterval(max(best - 2 * E, Fraction(0)), best + 2 * E, best, tuple(sorted(pair)))


# --- spacing lemma ------------------------------------------------------------------

def multiple_distance(pq: cf.PartialQuotients, d: int, *, exact: bool = True, max_extra: int = 8):
    """||d alpha|| exactly (quadratic or rational alpha) or as a tight enclosure."""
    surd = cf.alpha_surd(pq)
    if exact and surd is not None:
        x = surd * d
        return abs(x - x.round_nearest())
    if pq.is_finite:
        c = cf.convergents(pq, pq.length)[-1]
        x = Fraction(d * c.p, c.q)
        return abs(x - round(x))
    return None


def verify_lemma_spacing(alpha: AlphaSpec, i: int, *, exact: bool = True, orbit_budget: int = 200_000,
                         max_extra: int = 8) -> dict:
    """Certify ||x_k - x_j|| >= Delta_{i-1} for 0 <= j < k < q_i.

    The sorted-orbit enclosure settles most cases.  When the true minimum
    equals Delta_{i-1} (it always does, at k - j = q_{i-1}) the enclosures
    overlap; the exact route then compares ||d alpha|| with Delta_{i-1} for
    every difference d < q_i, using d = q_{i-1} as an identity and exact
    surds or refined enclosures elsewhere.
    """
    pq = alpha.quotients()
    q = cf.denominators(pq, i + 1)
    qi = q[i]
    result = {"lemma": "spacing", "i": i, "q_i": qi, "points": qi}
    if qi > orbit_budget:
        raise OrbitBudgetError(f"q_{i} = {qi} exceeds orbit budget {orbit_budget}")
    if qi < 2:
        result.update(status=cf.PASS, route="vacuous")
        return result
    pts = orbit_points(pq, qi - 1)
    dist = min_pairwise_distance(pts)
    delta = cf.delta_bounds(pq, i - 1)
    result.update(min_distance=[dist.lo, dist.hi], delta=[delta.lo, delta.hi])
    if dist.lo >= delta.hi:
        result.update(status=cf.PASS, route="enclosure")
        return result
    if dist.hi < delta.lo:
        result.update(status=cf.FAIL, route="enclosure")
        return result
    if not exact:
        result.update(status=cf.UNRESOLVED, route="enclosure")
        return result
    status, route = _spacing_by_multiples(pq, i, qi, q[i - 1], max_extra)
    result.update(status=status, route=route)
    return result


def _spacing_by_multiples(pq: cf.PartialQuotients, i: int, qi: int, q_prev: int, max_extra: int) -> tuple[str, str]:
    delta_x = cf.delta_exact(pq, i - 1)
    route = "exact"
    pending = []
    for d in range(1, qi):
        if d == q_prev:
            continue  # ||q_{i-1} alpha|| is Delta_{i-1} itself
        if delta_x is not None:
            v = multiple_distance(pq, d)
            if v < delta_x:
                return cf.FAIL, route
        else:
            pending.append(d)
    if not pending:
        return cf.PASS, route
    route = "refined"
    for extra in range(1, max_extra + 1):
        try:
            dlo, dhi = cf.delta_refined(pq, i - 1, extra)
            J = i - 1 + extra + 1
            c = cf.convergents(pq, J + 2)
        except cf.DepthExceeded:
            break
        a_lo, a_hi = sorted((c[J].value, c[J + 1].value))
        still = []
        for d in pending:
            lo_x, hi_x = d * a_lo, d * a_hi
            k = round((lo_x + hi_x) / 2)
            if not (k - Fraction(1, 2) < lo_x and hi_x < k + Fraction(1, 2)):
                still.append(d)
                continue
            nlo = 0 if lo_x <= k <= hi_x else min(abs(lo_x - k), abs(hi_x - k))
            nhi = max(abs(lo_x - k), abs(hi_x - k))
            if nlo > dhi:
                continue
            if nhi < dlo:
                return cf.FAIL, route
            still.append(d)
        pending = still
        if not pending:
            return cf.PASS, route
    return cf.UNRESOLVED, route


# --- Monte Carlo oracle ------------------------------------------------------------

def monte_carlo_measure(centers: Sequence[float], radii: Sequence[float], samples: int, rng) -> tuple[float, float]:
    """Fraction of uniform samples inside some ball, by brute-force membership.

    Returns (estimate, binomial standard error).  Independent of the arc
    sweep: every sample is tested against every ball.
    """
    import numpy as np

    c = np.asarray(centers, dtype=float)
    r = np.asarray(radii, dtype=float)
    ys = rng.random(samples)
    hit = np.zeros(samples, dtype=bool)
    for start in range(0, samples, 4096):
        y = ys[start:start + 4096, None]
        d = np.abs(y - c[None, :])
        d = np.minimum(d, 1.0 - d)
        hit[start:start + 4096] = (d <= r[None, :]).any(axis=1)
    p = float(hit.mean())
    return p, math.sqrt(max(p * (1 - p), 0.0) / samples)
