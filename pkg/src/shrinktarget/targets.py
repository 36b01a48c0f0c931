"""Radius sequences, block constructions and the divergence condition (*).

Every sequence is indexed from 0.  Indices below a family's natural start
reuse the first defined radius, which keeps the sequence non-increasing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import cf_engine as cf
from .alpha_factory import AlphaSpec, parse_alpha
from .exact import Root, as_fraction, fmt_fraction, log_of

# loglaw radii are float evaluations; this relative slack covers exp/log rounding
FLOAT_REL_SLACK = 1e-12


class SequenceError(ValueError):
    pass


class NoAdmissibleQ(SequenceError):
    """alpha does not decay fast enough to supply the next block denominator."""

    def __init__(self, n: int, searched: int):
        super().__init__(f"no admissible Q_n beyond n = {n - 1} (searched convergents up to index {searched})")
        self.n = n
        self.searched = searched


def _root_pow(x: Fraction | Root, s: Fraction) -> Root:
    if isinstance(x, Root):
        return Root.power(x.radicand, Fraction(s) / x.degree)
    return Root.power(x, s)


def _widen(v: float) -> tuple[Fraction, Fraction]:
    return Fraction(v * (1 - FLOAT_REL_SLACK)), Fraction(v * (1 + FLOAT_REL_SLACK))


class RadiusSequence:
    """Non-increasing radii r_0, r_1, ...

    Subclasses provide ``exact`` (a Fraction, a Root, or None when only a float
    evaluation exists) and ``log_value``.
    """

    family = "abstract"
    start = 1

    @property
    def text(self) -> str:
        raise NotImplementedError

    @property
    def end(self) -> int | None:
        """Exclusive end of the domain (None for infinite sequences)."""
        return None

    def _index(self, n: int) -> int:
        if n < 0:
            raise IndexError("negative index")
        if self.end is not None and n >= self.end:
            raise IndexError(f"index {n} beyond sequence domain (< {self.end})")
        return max(n, self.start)

    def exact(self, n: int) -> Fraction | Root | None:
        return None

    def log_value(self, n: int) -> float:
        x = self.exact(n)
        if x is None:
            raise NotImplementedError
        if x == 0:
            return -math.inf
        return x.log() if isinstance(x, Root) else log_of(x)

    def value(self, n: int) -> float:
        return math.exp(self.log_value(n))

    def bounds(self, n: int, bits: int = 64) -> tuple[Fraction, Fraction]:
        x = self.exact(n)
        if isinstance(x, Fraction):
            return x, x
        if isinstance(x, Root):
            return x.bounds(bits)
        return _widen(self.value(n))

    def power_bounds(self, n: int, s, bits: int = 64) -> tuple[Fraction, Fraction]:
        s = as_fraction(s)
        x = self.exact(n)
        if x is not None:
            return _root_pow(x, s).bounds(bits)
        v = math.exp(float(s) * self.log_value(n))
        return _widen(v)

    def float_array(self, lo: int, hi: int) -> np.ndarray:
        """Float radii for indices lo..hi-1."""
        return np.array([self.value(n) for n in range(lo, hi)], dtype=float)

    def radii(self, n_max: int, bits: int = 64) -> list:
        """Exact radii (Fraction) or certified (lo, hi) pairs for n = 0..n_max."""
        out = []
        for n in range(n_max + 1):
            x = self.exact(n)
            out.append(x if isinstance(x, Fraction) else self.bounds(n, bits))
        return out


@dataclass(frozen=True)
class PowerSequence(RadiusSequence):
    """r_n = c * n^(-beta)."""

    c: Fraction
    beta: Fraction
    family = "power"

    def __post_init__(self):
        if self.c < 0 or self.beta < 0:
            raise SequenceError("power sequence needs c >= 0 and beta >= 0")

    @property
    def text(self) -> str:
        return f"power:c={self.c},beta={self.beta}"

    def exact(self, n: int):
        n = self._index(n)
        if self.c == 0:
            return Fraction(0)
        r = Root.power(n, -self.beta) * self.c
        e = r.exact()
        return e if e is not None else r

    def float_array(self, lo: int, hi: int) -> np.ndarray:
        n = np.maximum(np.arange(lo, hi, dtype=float), self.start)
        return float(self.c) * n ** (-float(self.beta))


@dataclass(frozen=True)
class ConstantSequence(RadiusSequence):
    r: Fraction
    family = "const"
    start = 0

    @property
    def text(self) -> str:
        return f"const:r={self.r}"

    def exact(self, n: int):
        self._index(n)
        return self.r


@dataclass(frozen=True)
class LogLawSequence(RadiusSequence):
    """r_n = (n ln n)^(-1/s) for n >= 2, evaluated in floats."""

    s: Fraction
    family = "loglaw"
    start = 2

    def __post_init__(self):
        if self.s <= 0:
            raise SequenceError("loglaw needs s > 0")

    @property
    def text(self) -> str:
        return f"loglaw:s={self.s}"

    def log_value(self, n) -> float:
        n = self._index(n) if isinstance(n, int) else max(n, self.start)
        ln = log_of(n)
        return -(ln + math.log(ln)) / float(self.s)

    def float_array(self, lo: int, hi: int) -> np.ndarray:
        n = np.maximum(np.arange(lo, hi, dtype=float), self.start)
        return (n * np.log(n)) ** (-1.0 / float(self.s))


@dataclass(frozen=True)
class ListSequence(RadiusSequence):
    """Explicit radii r_1, r_2, ... (r_0 = r_1)."""

    values: tuple[Fraction, ...]
    source: str = "list"
    family = "list"

    def __post_init__(self):
        if not self.values:
            raise SequenceError("empty radius list")
        if any(v < 0 for v in self.values):
            raise SequenceError("radii must be >= 0")
        if any(a < b for a, b in zip(self.values, self.values[1:])):
            raise SequenceError("radius list is not non-increasing")

    @property
    def text(self) -> str:
        return f"file:{self.source}" if self.source != "list" else "list:" + ";".join(map(str, self.values))

    @property
    def end(self) -> int:
        return len(self.values) + 1

    def exact(self, n: int):
        return self.values[self._index(n) - 1]


@dataclass(frozen=True)
class DeltaThresholdSequence(RadiusSequence):
    """r_n = eps * lo(Delta_{i-1}) on [q_{i-1}, q_i); lo(Delta_{i-1}) = 1/(q_i + q_{i-1})."""

    alpha: AlphaSpec
    eps: Fraction
    family = "delta"

    @property
    def text(self) -> str:
        return f"delta:eps={self.eps},alpha={self.alpha.text}"

    @cached_property
    def _pq(self) -> cf.PartialQuotients:
        return self.alpha.quotients()

    def exact(self, n: int):
        n = self._index(n)
        i = 1
        while True:
            q = cf.denominators(self._pq, i + 1)
            if q[i] > n:
                return self.eps * Fraction(1, q[i] + q[i - 1])
            i += 1


# --- counterexample blocks ----------------------------------------------------------

@dataclass(frozen=True)
class Prop21Block:
    n: int
    index: int  # convergent index i with Q_n = q_i
    Q: int
    U_prev: int
    U: int
    R: Fraction

    @property
    def size(self) -> int:
        return self.U - self.U_prev


@dataclass(frozen=True)
class Prop21Blocks(RadiusSequence):
    """Block-constant radii r_l = R_n on U_{n-1} <= l < U_n, with U_0 = 0."""

    alpha: AlphaSpec
    s: Fraction
    sigma: Fraction
    blocks: tuple[Prop21Block, ...]
    family = "prop21"
    start = 0

    @property
    def text(self) -> str:
        return f"prop21:s={self.s},n={len(self.blocks)},alpha={self.alpha.text}"

    @property
    def end(self) -> int:
        return self.blocks[-1].U

    @property
    def Q(self) -> list[int]:
        return [b.Q for b in self.blocks]

    @property
    def U(self) -> list[int]:
        return [0] + [b.U for b in self.blocks]

    @property
    def R(self) -> list[Fraction]:
        return [b.R for b in self.blocks]

    @property
    def const(self) -> Fraction:
        """Lower bound 1 - 2^-s - Q_1^-s for every block's power sum (when rational)."""
        lo, _ = self.const_bounds()
        return lo

    def const_bounds(self, bits: int = 96) -> tuple[Fraction, Fraction]:
        a = Root.power(2, -self.s).bounds(bits)
        b = Root.power(self.blocks[0].Q, -self.s).bounds(bits)
        return 1 - a[1] - b[1], 1 - a[0] - b[0]

    def block_of(self, l: int) -> Prop21Block:
        self._index(l)
        for b in self.blocks:
            if b.U_prev <= l < b.U:
                return b
        raise IndexError(l)

    def exact(self, n: int):
        return self.block_of(n).R

    def block_power_sum(self, n: int, bits: int = 96) -> tuple[Fraction, Fraction]:
        """Enclosure of sum_{l in block n} r_l^s = (U_n - U_{n-1}) R_n^s."""
        b = self.blocks[n - 1]
        lo, hi = Root.power(b.R, self.s).bounds(bits)
        return b.size * lo, b.size * hi


def _prop21_admissible(q_i: int, q_next: int, n: int, s: Fraction, sigma: Fraction) -> bool:
    # certified ||q_i alpha|| <= hi(Delta_i) = 1/q_{i+1} <= 1 / (2 n^(2s+2) q_i^sigma)
    return Root.power(q_i, sigma) * Root.power(n, 2 * s + 2) * 2 <= q_next


def prop21_sequence(alpha: AlphaSpec, s, n_max: int, *, sigma=None, max_index: int | None = None) -> Prop21Blocks:
    """Greedy block construction: Q_n is the first admissible convergent denominator.

    Admissible means q_i >= 2, q_i >= 2 Q_{n-1}, and the certified decay
    hi(Delta_i) <= 1/(2 n^(2s+2) q_i^sigma).  Raises :class:`NoAdmissibleQ`
    when the expansion runs out or no admissible q_i appears up to ``max_index``
    (default: the expansion's depth cap).  This is the expected outcome for
    alpha in Omega(sigma).
    """
    s = as_fraction(s)
    sigma = s if sigma is None else as_fraction(sigma)
    if s < 1:
        raise SequenceError("s must be >= 1")
    if n_max < 1:
        raise SequenceError("n_max must be >= 1")
    pq = alpha.quotients()
    max_index = pq.depth_cap if max_index is None else max_index
    blocks: list[Prop21Block] = []
    i, U_prev, Q_prev = 1, 0, 1
    for n in range(1, n_max + 1):
        while True:
            if i > max_index:
                raise NoAdmissibleQ(n, max_index)
            try:
                q = cf.denominators(pq, i + 2)
            except (cf.DepthExceeded, cf.ExpansionTooShort):
                raise NoAdmissibleQ(n, i) from None
            if q[i] >= 2 and q[i] >= 2 * Q_prev and _prop21_admissible(q[i], q[i + 1], n, s, sigma):
                break
            i += 1
        Q = q[i]
        U = Root.power(n * n * Q, s).floor()  # n^(2s) Q^s
        if U <= U_prev:
            raise SequenceError(f"U not increasing at n = {n}")
        blocks.append(Prop21Block(n, i, Q, U_prev, U, Fraction(1, n * n * Q)))
        U_prev, Q_prev = U, Q
        i += 1
    return Prop21Blocks(alpha, s, sigma, tuple(blocks))


# --- partial sums -------------------------------------------------------------------

@dataclass(frozen=True)
class PowerSum:
    N: int
    value: Fraction | float
    err: float  # absolute error bound (0 for exact sums)
    exact: bool


def partial_power_sum(seq: RadiusSequence, s, N: int, *, measure: bool = True, first: int = 1,
                      chunk: int = 1 << 16) -> PowerSum:
    """Sum of (2 r_n)^s (``measure=True``) or r_n^s over first <= n <= N.

    Exact when s is an integer and every (2 r_n)^s is rational; otherwise a
    compensated float sum with a relative error bound.
    """
    s = as_fraction(s)
    if N < first:
        return PowerSum(N, Fraction(0), 0.0, True)
    scale = 2 if measure else 1
    if s.denominator == 1 and N - first < 20_000:
        k = int(s)
        terms = []
        for n in range(first, N + 1):
            v = seq.exact(n)
            if isinstance(v, Root):
                v = (v * scale) ** k
                v = v.exact()
            elif v is not None:
                v = (scale * v) ** k
            if v is None:
                break
            terms.append(v)
        else:
            return PowerSum(N, sum(terms), 0.0, True)
    fs = float(s)
    parts = []
    for lo in range(first, N + 1, chunk):
        hi = min(N + 1, lo + chunk)
        arr = seq.float_array(lo, hi)
        parts.append(math.fsum((scale * arr) ** fs))
    total = math.fsum(parts)
    # per-term relative error of a few ulps, plus the loglaw evaluation slack
    err = total * (N * 4 * 2.2e-16 + fs * FLOAT_REL_SLACK)
    return PowerSum(N, total, err, False)


def loglaw_power_sum_oracle(s, N: int, start: int = 2) -> float:
    """Euler-Maclaurin estimate of sum_{n=start}^N (2 r_n)^s for the loglaw family.

    (2 r_n)^s = 2^s / (n ln n); the integral term is ln ln N - ln ln start.
    """
    s = float(as_fraction(s))

    def f(x):
        return 1.0 / (x * math.log(x))

    def fp(x):
        return -(math.log(x) + 1.0) / (x * math.log(x)) ** 2

    a, b = float(start), float(N)
    core = math.log(math.log(b)) - math.log(math.log(a)) + (f(a) + f(b)) / 2 + (fp(b) - fp(a)) / 12
    return 2 ** s * core


def monotonicity_scan(seq: RadiusSequence, n_max: int = 10_000) -> int | None:
    """First n with r_n < r_{n+1} (exact comparison where available), else None."""
    end = n_max if seq.end is None else min(n_max, seq.end - 1)
    prev = seq.exact(0)
    prev_f = None if prev is not None else seq.value(0)
    for n in range(1, end + 1):
        cur = seq.exact(n)
        if cur is not None and prev is not None:
            if _less(prev, cur):
                return n - 1
        else:
            v = seq.value(n)
            p = prev_f if prev_f is not None else float(prev)
            if p < v * (1 - 4 * FLOAT_REL_SLACK):
                return n - 1
            prev_f = v
        prev = cur
    return None


def _less(a, b) -> bool:
    if isinstance(a, Root):
        return a < b
    if isinstance(b, Root):
        return b > a
    return a < b


# --- condition (*) ------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionStarSpec:
    """Scale t_1 < t_2 < ... with gauge values delta_i = delta(t_i) >= 1.

    Gauge values are Roots so that t_i^s delta_i^(s+1) is compared exactly.
    """

    s: Fraction
    t: tuple[int, ...]
    delta: tuple[Root, ...]

    def threshold(self, i: int) -> int:
        """floor(t_i^s delta_i^(s+1)) for 0-based position i."""
        return _threshold_root(self.t[i], self.delta[i], self.s).floor()

    def violations(self) -> list[int]:
        """Positions i where t_{i+1} > t_i^s delta_i^(s+1) fails (or other invariants break)."""
        bad = []
        for i in range(len(self.t)):
            if self.delta[i] < 1 or (i and self.delta[i] < self.delta[i - 1]):
                bad.append(i)
                continue
            if i + 1 < len(self.t) and not (_threshold_root(self.t[i], self.delta[i], self.s) < self.t[i + 1]):
                bad.append(i)
        return bad

    @property
    def valid(self) -> bool:
        return all(x > 0 for x in self.t) and not self.violations()


def _threshold_root(t: int, delta: Root, s: Fraction) -> Root:
    return Root.power(t, s) * _root_pow(delta, s + 1)


def minimal_scale(s, gauge: Callable[[int], Root], terms: int, t1: int = 1) -> ConditionStarSpec:
    """Smallest admissible scale: t_{i+1} = floor(t_i^s delta(t_i)^(s+1)) + 1.

    ``gauge(i)`` gives delta at the i-th scale point (1-based), so the gauge
    is defined along the scale itself.
    """
    s = as_fraction(s)
    t, d = [t1], [gauge(1)]
    for i in range(2, terms + 1):
        t.append(_threshold_root(t[-1], d[-1], s).floor() + 1)
        d.append(gauge(i))
    return ConditionStarSpec(s, tuple(t), tuple(d))


def prop62_gauge(s) -> Callable[[int], Root]:
    """delta(t_n) = n^((s-1) / (2(s+1)))."""
    s = as_fraction(s)
    e = (s - 1) / (2 * (s + 1))
    return lambda n: Root.power(n, e)


def index_gauge(n: int) -> Root:
    """delta(t_n) = n, a steadily growing gauge."""
    return Root(n)


@dataclass
class ConditionStarReport:
    s: Fraction
    terms: list[float]
    partial_sums: list[float]
    thresholds: list[int]
    trend: str
    slope: float | None

    def as_dict(self) -> dict:
        return {
            "s": fmt_fraction(self.s),
            "terms": self.terms,
            "partial_sums": self.partial_sums,
            "threshold_bits": [t.bit_length() for t in self.thresholds],
            "trend": self.trend,
            "decay_exponent": self.slope,
        }


def check_condition_star(seq: RadiusSequence, spec: ConditionStarSpec, n_terms: int) -> ConditionStarReport:
    """Partial sums of t_i * r_{floor(t_i^s delta_i^(s+1))} for i <= n_terms."""
    if not spec.valid:
        raise SequenceError(f"inadmissible scale at positions {spec.violations()}")
    n_terms = min(n_terms, len(spec.t))
    terms, sums, thr = [], [], []
    acc = 0.0
    for i in range(n_terms):
        T = spec.threshold(i)
        if seq.end is not None and T >= seq.end:
            raise IndexError(f"threshold index {T} beyond sequence domain")
        term = math.exp(log_of(spec.t[i]) + seq.log_value(T))
        acc += term
        terms.append(term)
        sums.append(acc)
        thr.append(T)
    trend, slope = classify_trend(list(range(1, n_terms + 1)), terms)
    return ConditionStarReport(spec.s, terms, sums, thr, trend, slope)


GROWING, BOUNDED, UNDECIDED = "growing", "bounded", "undecided"

# decay exponents at or below this are read as a divergent (growing) series
TREND_CUTOFF = 1.25


def classify_trend(indices: Sequence[float], terms: Sequence[float]) -> tuple[str, float | None]:
    """Heuristic: fit terms ~ index^(-p) on the last half; p <= 1.25 reads as growing.

    Finite data cannot decide divergence; this only names the visible trend.
    """
    pts = [(math.log(i), math.log(t)) for i, t in zip(indices, terms) if t > 0 and i > 0]
    pts = pts[len(pts) // 2:]
    if len(pts) < 3:
        return UNDECIDED, None
    xs, ys = zip(*pts)
    slope = float(np.polyfit(xs, ys, 1)[0])
    p = -slope
    return (GROWING if p <= TREND_CUTOFF else BOUNDED), p


def prop61_majorant(s, t: Sequence[int]) -> list[float]:
    """Per-term bounds (s ln t_n)^(-1/s) on the loglaw condition-(*) terms."""
    s = float(as_fraction(s))
    return [(s * log_of(x)) ** (-1 / s) for x in t]


def prop61_geometric_bound(s) -> float:
    """Closed form of sum_{n>=1} s^(-n/s) / ln(2)^(1/s), which dominates the majorant for t_1 >= 2."""
    s = float(as_fraction(s))
    r = s ** (-1 / s)
    return r / (1 - r) / math.log(2) ** (1 / s) + (s * math.log(2)) ** (-1 / s)


# --- harmonic-gauge block sequence --------------------------------------------------

@dataclass(frozen=True)
class Prop62Sequence(RadiusSequence):
    """r_l = 1/(t_m m) for T_{m-1} < l <= T_m, T_m = floor(t_m^s delta(t_m)^(s+1))."""

    s: Fraction
    scale: ConditionStarSpec
    family = "prop62"

    @property
    def text(self) -> str:
        return f"prop62:s={self.s},depth={len(self.scale.t)}"

    @cached_property
    def thresholds(self) -> tuple[int, ...]:
        return tuple(self.scale.threshold(i) for i in range(len(self.scale.t)))

    @property
    def end(self) -> int:
        return self.thresholds[-1] + 1

    def block_of(self, l: int) -> int:
        l = self._index(l)
        lo, hi = 0, len(self.thresholds) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.thresholds[mid] >= l:
                hi = mid
            else:
                lo = mid + 1
        return lo + 1

    def exact(self, n: int):
        m = self.block_of(n)
        return Fraction(1, self.scale.t[m - 1] * m)

    def block_sizes(self) -> list[int]:
        out, prev = [], 0
        for T in self.thresholds:
            out.append(T - prev)
            prev = T
        return out

    def block_power_sums(self, bits: int = 64) -> list[tuple[Fraction, Fraction]]:
        """Enclosures of sum over block m of r_l^s."""
        out = []
        for m, size in enumerate(self.block_sizes(), start=1):
            lo, hi = Root.power(Fraction(1, self.scale.t[m - 1] * m), self.s).bounds(bits)
            out.append((size * lo, size * hi))
        return out

    def block_bound_holds(self, m: int) -> bool:
        """Exact check that block m's power sum is at most m^(-(s+1)/2)."""
        size = self.block_sizes()[m - 1]
        lhs = Root.power(Fraction(1, self.scale.t[m - 1] * m), self.s) * size
        return lhs <= Root.power(m, -(self.s + 1) / 2)


def prop62_sequence(s, depth: int = 12, *, t1: int = 1) -> Prop62Sequence:
    s = as_fraction(s)
    if s <= 1:
        raise SequenceError("prop62 needs s > 1")
    scale = minimal_scale(s, prop62_gauge(s), depth, t1)
    if not scale.valid:
        raise SequenceError("inadmissible scale")
    return Prop62Sequence(s, scale)


# --- spec strings -------------------------------------------------------------------

def _kv(body: str) -> dict[str, str]:
    """Parse k=v pairs; ``alpha=`` swallows the rest of the string."""
    out = {}
    if "alpha=" in body:
        body, _, a = body.partition("alpha=")
        out["alpha"] = a
        body = body.rstrip(",")
    for kv in filter(None, body.split(",")):
        k, _, v = kv.partition("=")
        if not _:
            raise SequenceError(f"expected key=value, got {kv!r}")
        out[k.strip()] = v.strip()
    return out


def read_radius_file(path: str) -> ListSequence:
    """CSV with one exact rational per row (first column): r_1, r_2, ..."""
    vals = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            vals.append(as_fraction(row[0]))
    return ListSequence(tuple(vals), path)


def parse_sequence(text: str) -> RadiusSequence:
    kind, _, body = text.strip().partition(":")
    try:
        if kind == "file":
            return read_radius_file(body)
        if kind == "list":
            return ListSequence(tuple(as_fraction(v) for v in body.split(";")))
        d = _kv(body)
        if kind == "power":
            return PowerSequence(as_fraction(d["c"]), as_fraction(d["beta"]))
        if kind == "const":
            return ConstantSequence(as_fraction(d["r"]))
        if kind == "loglaw":
            return LogLawSequence(as_fraction(d["s"]))
        if kind == "prop21":
            return prop21_sequence(parse_alpha(d["alpha"]), as_fraction(d["s"]), int(d.get("n", 5)))
        if kind == "prop62":
            return prop62_sequence(as_fraction(d["s"]), int(d.get("depth", 12)))
        if kind == "delta":
            return DeltaThresholdSequence(parse_alpha(d["alpha"]), as_fraction(d["eps"]))
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, SequenceError):
            raise
        raise SequenceError(f"malformed sequence spec {text!r}: {exc}") from None
    raise SequenceError(f"unknown sequence family {kind!r}")
