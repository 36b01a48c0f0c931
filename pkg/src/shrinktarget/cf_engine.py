"""Continued fractions, convergents and certified enclosures of |q_i alpha - p_i|.

A :class:`PartialQuotients` is a0 plus a tail that is finite, eventually
periodic, or generated by a :class:`QuotientRule`.  Convergent tables are
computed with exact integers and cached per expansion.

Comparisons involving ``Delta_i = |q_i alpha - p_i|`` never use floats.  They
start from the interval [1/(q_{i+1}+q_i), 1/q_{i+1}] and escalate to the
exact quadratic-surd value (when alpha is a quadratic irrational) or to
tighter enclosures built from later convergents.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .exact import QuadraticSurd

DEFAULT_DEPTH_CAP = 64
DEFAULT_MAX_BITS = 1 << 22

PASS, FAIL, UNRESOLVED = "pass", "fail", "unresolved"


class CFError(ValueError):
    """Invalid continued-fraction input."""


class ExpansionTooShort(CFError):
    """A finite expansion ran out of quotients."""


class DepthExceeded(CFError):
    """A generated expansion hit its depth cap or bit-size budget."""


@dataclass(frozen=True)
class QuotientRule:
    """a_i as a pure function of i and the denominators q_0..q_{i-1}.

    ``name`` and ``params`` identify the rule (and are what gets serialized);
    ``func`` is excluded from equality and hashing.
    """

    name: str
    params: tuple[tuple[str, str], ...]
    func: Callable[[int, Sequence[int]], int] = field(compare=False, hash=False, repr=False)

    def __call__(self, i: int, qs: Sequence[int]) -> int:
        return self.func(i, qs)


@dataclass(frozen=True)
class PartialQuotients:
    """[a0; a1, a2, ...] with a finite, eventually periodic or rule-generated tail.

    For eventually periodic tails, ``terms`` is the pre-period.  ``surd``
    records (P, Q, D) when alpha = (P + sqrt(D)) / Q is known exactly.
    """

    a0: int
    terms: tuple[int, ...] = ()
    period: tuple[int, ...] = ()
    rule: QuotientRule | None = None
    surd: tuple[int, int, int] | None = None
    depth_cap: int = DEFAULT_DEPTH_CAP
    max_bits: int = DEFAULT_MAX_BITS

    def __post_init__(self):
        if self.period and self.rule is not None:
            raise CFError("an expansion is either periodic or rule-generated")
        if any(a < 1 for a in self.terms) or any(a < 1 for a in self.period):
            raise CFError("partial quotients a_i (i >= 1) must be >= 1")
        if self.kind == "finite" and len(self.terms) >= 1 and self.terms[-1] == 1:
            # canonical form: [..., a, 1] == [..., a + 1]
            if len(self.terms) == 1:
                object.__setattr__(self, "a0", self.a0 + 1)
                object.__setattr__(self, "terms", ())
            else:
                object.__setattr__(self, "terms", self.terms[:-2] + (self.terms[-2] + 1,))

    @property
    def kind(self) -> str:
        if self.rule is not None:
            return "rule"
        if self.period:
            return "periodic"
        return "finite"

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def length(self) -> int | None:
        """Number of quotients including a0, or None for infinite expansions."""
        return 1 + len(self.terms) if self.is_finite else None

    def quotient(self, i: int) -> int:
        return self.quotients(i + 1)[i]

    def quotients(self, n: int) -> list[int]:
        """The first n quotients a_0 .. a_{n-1}."""
        return list(_table(self, n)[0])

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "a0": str(self.a0)}
        if self.terms:
            out["terms"] = [str(a) for a in self.terms]
        if self.period:
            out["period"] = [str(a) for a in self.period]
        if self.rule is not None:
            out["rule"] = {"name": self.rule.name, "params": dict(self.rule.params)}
        if self.surd is not None:
            out["surd"] = [str(v) for v in self.surd]
        return out

    def __str__(self) -> str:
        if self.kind == "finite":
            return f"[{self.a0}; {', '.join(map(str, self.terms))}]" if self.terms else f"[{self.a0}]"
        if self.kind == "periodic":
            pre = "".join(f"{a}, " for a in self.terms)
            return f"[{self.a0}; {pre}({', '.join(map(str, self.period))})]"
        return f"[{self.a0}; rule {self.rule.name}]"


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class DeltaInterval:
    """Certified enclosure lo <= Delta_i <= hi."""

    i: int
    lo: Fraction
    hi: Fraction

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi


_PREFIXES: "OrderedDict[PartialQuotients, tuple[list[int], list[int], list[int], int | None]]" = OrderedDict()
_PREFIX_SLOTS = 64
_PREFIX_LOCK = threading.RLock()


def _prefix(pq: PartialQuotients) -> tuple[list[int], list[int], list[int], int | None]:
    """Longest computed (a, p, q) prefix for pq, plus the index that broke the bit budget, if any."""
    entry = _PREFIXES.get(pq)
    if entry is None:
        entry = ([pq.a0], [pq.a0], [1], None)
        _PREFIXES[pq] = entry
        if len(_PREFIXES) > _PREFIX_SLOTS:
            _PREFIXES.popitem(last=False)
    else:
        _PREFIXES.move_to_end(pq)
    return entry


def _table(pq: PartialQuotients, n: int) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """(a, p, q) tuples for indices 0..n-1, extending a cached prefix."""
    with _PREFIX_LOCK:
        return _extend(pq, n)


def _extend(pq: PartialQuotients, n: int) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    if n < 1:
        raise CFError("need at least one quotient")
    if pq.is_finite and n > pq.length:
        raise ExpansionTooShort(f"expansion {pq} has only {pq.length} quotients, {n} requested")
    if pq.kind == "rule" and n > pq.depth_cap + 1:
        raise DepthExceeded(f"rule {pq.rule.name}: depth {n - 1} exceeds cap {pq.depth_cap}")
    a, p, q, broken = _prefix(pq)
    if broken is not None and n > broken:
        raise DepthExceeded(f"q_{broken} exceeds the bit budget {pq.max_bits}")
    pre, per = pq.terms, pq.period
    for i in range(len(q), n):
        if pq.kind == "rule":
            ai = pq.rule(i, q)
            if not isinstance(ai, int) or ai < 1:
                raise CFError(f"rule {pq.rule.name} produced a_{i} = {ai!r}")
        elif i - 1 < len(pre):
            ai = pre[i - 1]
        else:
            ai = per[(i - 1 - len(pre)) % len(per)]
        qi = ai * q[-1] + (q[-2] if i >= 2 else 0)
        if qi.bit_length() > pq.max_bits:
            _PREFIXES[pq] = (a, p, q, i)
            raise DepthExceeded(f"q_{i} has {qi.bit_length()} bits (budget {pq.max_bits})")
        p.append(ai * p[-1] + (p[-2] if i >= 2 else 1))
        a.append(ai)
        q.append(qi)
    return tuple(a[:n]), tuple(p[:n]), tuple(q[:n])


# --- expansions ---------------------------------------------------------------

def from_quotients(quotients: Sequence[int]) -> PartialQuotients:
    quotients = [int(a) for a in quotients]
    if not quotients:
        raise CFError("empty quotient list")
    return PartialQuotients(quotients[0], tuple(quotients[1:]))


def expand_rational(p: int, q: int) -> PartialQuotients:
    """Euclidean expansion of p/q in canonical form (no trailing 1)."""
    if q < 1:
        raise CFError("denominator must be >= 1")
    out = []
    while q:
        a, r = divmod(p, q)
        out.append(a)
        p, q = q, r
    return from_quotients(out)


def expand_quadratic(P: int, Q: int, D: int) -> PartialQuotients:
    """Eventually periodic expansion of (P + sqrt(D)) / Q.

    D must be a positive non-square.  When Q does not divide D - P^2 the
    triple is rescaled to (P|Q|, Q|Q|, D Q^2), which names the same number.
    """
    if D <= 0 or math.isqrt(D) ** 2 == D:
        raise CFError(f"D = {D} must be a positive non-square")
    if Q == 0:
        raise CFError("Q must be nonzero")
    surd = (P, Q, D)
    if (D - P * P) % Q:
        P, Q, D = P * abs(Q), Q * abs(Q), D * Q * Q
    quotients: list[int] = []
    seen: dict[tuple[int, int], int] = {}
    k = 0
    while True:
        if k >= 1:
            if (P, Q) in seen:
                start = seen[(P, Q)]
                break
            seen[(P, Q)] = k
        a = QuadraticSurd(P, 1, Q, D).floor()
        quotients.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
        k += 1
    a0 = quotients[0]
    pre = tuple(quotients[1:start])
    period = tuple(quotients[start:])
    return PartialQuotients(a0, pre, period, surd=surd)


def alpha_surd(pq: PartialQuotients) -> QuadraticSurd | None:
    if pq.surd is None:
        return None
    P, Q, D = pq.surd
    return QuadraticSurd(P, 1, Q, D)


def normalize(pq: PartialQuotients) -> PartialQuotients:
    """Expansion of |alpha - round(alpha)|, which lies in (0, 1/2].

    q_i and Delta_i of the result are the ones the shrinking-target arguments
    use (rotation by alpha and by -alpha or alpha + 1 are equivalent).
    """
    if pq.surd is not None:
        P, Q, D = pq.surd
        x = QuadraticSurd(P, 1, Q, D)
        k = x.round_nearest()
        P2 = P - k * Q
        if QuadraticSurd(P2, 1, Q, D).sign() < 0:
            return expand_quadratic(P2, -Q, D)
        return expand_quadratic(P2, Q, D)
    if pq.is_finite:
        x = convergents(pq, pq.length)[-1].value
        x = abs(x - round(x))
        return expand_rational(x.numerator, x.denominator)
    a1 = pq.quotient(1)
    if a1 >= 2:
        return PartialQuotients(0, pq.terms, pq.period, pq.rule, None, pq.depth_cap, pq.max_bits)

    # alpha mod 1 = [0; 1, a2, a3, ...]  =>  1 - that = [0; a2 + 1, a3, ...]
    def shifted(i: int, qs: Sequence[int], _src=pq) -> int:
        a = _src.quotient(i + 1)
        return a + 1 if i == 1 else a

    rule = QuotientRule("normalized", (("of", str(pq)),), shifted)
    return PartialQuotients(0, rule=rule, depth_cap=max(pq.depth_cap - 1, 1), max_bits=pq.max_bits)


# --- convergents and Delta enclosures ---------------------------------------------

def convergents(pq: PartialQuotients, n: int) -> list[Convergent]:
    """Convergents 0..n-1 from p_i = a_i p_{i-1} + p_{i-2}, q likewise."""
    if n < 1:
        raise CFError("n must be >= 1")
    _, p, q = _table(pq, n)
    return [Convergent(i, p[i], q[i]) for i in range(n)]


def denominators(pq: PartialQuotients, n: int) -> tuple[int, ...]:
    return _table(pq, n)[2]


def delta_bounds(pq: PartialQuotients, i: int) -> DeltaInterval:
    """[1/(q_{i+1} + q_i), 1/q_{i+1}], which always contains Delta_i."""
    if i < 0:
        raise CFError("index must be >= 0")
    try:
        _, _, q = _table(pq, i + 2)
    except ExpansionTooShort as exc:
        raise ExpansionTooShort(f"Delta_{i} needs q_{i + 1}: {exc}") from None
    return DeltaInterval(i, Fraction(1, q[i + 1] + q[i]), Fraction(1, q[i + 1]))


def delta_exact(pq: PartialQuotients, i: int) -> QuadraticSurd | Fraction | None:
    """Delta_i exactly, for quadratic or rational alpha; None otherwise."""
    if pq.is_finite:
        a, p, q = _table(pq, pq.length)
        if i >= len(q):
            raise ExpansionTooShort(f"index {i} beyond expansion")
        x = Fraction(p[-1], q[-1])
        return abs(q[i] * x - p[i])
    surd = alpha_surd(pq)
    if surd is None:
        return None
    _, p, q = _table(pq, i + 1)
    return abs(surd * q[i] - p[i])


def delta_refined(pq: PartialQuotients, i: int, extra: int = 1) -> tuple[Fraction, Fraction]:
    """Enclosure of Delta_i from alpha lying between convergents i+extra and i+extra+1."""
    if extra < 1:
        d = delta_bounds(pq, i)
        return d.lo, d.hi
    J = i + extra
    if pq.is_finite and J + 2 > pq.length:
        v = delta_exact(pq, i)
        return v, v
    _, p, q = _table(pq, J + 2)
    v1 = Fraction(abs(q[i] * p[J] - p[i] * q[J]), q[J])
    v2 = Fraction(abs(q[i] * p[J + 1] - p[i] * q[J + 1]), q[J + 1])
    return min(v1, v2), max(v1, v2)


_RELATIONS = {
    "<": lambda s: s < 0,
    "<=": lambda s: s <= 0,
    ">": lambda s: s > 0,
    ">=": lambda s: s >= 0,
}


def check_interval(lo, hi, x, rel: str) -> str | None:
    """Decide 'v rel x' for every v in [lo, hi]: PASS, FAIL, or None if mixed."""
    holds = _RELATIONS[rel]
    if holds((lo > x) - (lo < x)) and holds((hi > x) - (hi < x)):
        return PASS
    if not holds((lo > x) - (lo < x)) and not holds((hi > x) - (hi < x)):
        return FAIL
    return None


def check_delta(pq: PartialQuotients, i: int, rel: str, x, *, exact: bool = True,
                max_extra: int = 6) -> tuple[str, str]:
    """Certified verdict for 'Delta_i rel x' with the route that settled it."""
    d = delta_bounds(pq, i)
    verdict = check_interval(d.lo, d.hi, x, rel)
    if verdict is not None:
        return verdict, "enclosure"
    if not exact:
        return UNRESOLVED, "enclosure"
    ex = delta_exact(pq, i)
    if ex is not None:
        s = (ex - x).sign() if isinstance(ex, QuadraticSurd) else (ex > x) - (ex < x)
        return (PASS if _RELATIONS[rel](s) else FAIL), "exact"
    for extra in range(1, max_extra + 1):
        try:
            lo, hi = delta_refined(pq, i, extra)
        except DepthExceeded:
            break
        verdict = check_interval(lo, hi, x, rel)
        if verdict is not None:
            return verdict, "refined"
    return UNRESOLVED, "refined"


def check_delta_ratio(pq: PartialQuotients, a: int, b: int, c: Fraction, rel: str, *,
                      exact: bool = True, max_extra: int = 6) -> tuple[str, str]:
    """Certified verdict for 'Delta_a rel c * Delta_b' (c > 0)."""
    c = Fraction(c)
    if a == b:
        s = (1 > c) - (1 < c)
        return (PASS if _RELATIONS[rel](s) else FAIL), "identity"
    da, db = delta_bounds(pq, a), delta_bounds(pq, b)
    verdict = check_interval(da.lo - c * db.hi, da.hi - c * db.lo, 0, rel)
    if verdict is not None:
        return verdict, "enclosure"
    if not exact:
        return UNRESOLVED, "enclosure"
    ea, eb = delta_exact(pq, a), delta_exact(pq, b)
    if ea is not None and eb is not None:
        diff = ea - eb * c
        s = diff.sign() if isinstance(diff, QuadraticSurd) else (diff > 0) - (diff < 0)
        return (PASS if _RELATIONS[rel](s) else FAIL), "exact"
    for extra in range(1, max_extra + 1):
        try:
            alo, ahi = delta_refined(pq, a, extra)
            blo, bhi = delta_refined(pq, b, extra)
        except DepthExceeded:
            break
        verdict = check_interval(alo - c * bhi, ahi - c * blo, 0, rel)
        if verdict is not None:
            return verdict, "refined"
    return UNRESOLVED, "refined"


# --- lemma verifiers -------------------------------------------------------------

@dataclass
class LemmaReport:
    lemma: str
    i_max: int
    checked: int = 0
    status: str = PASS
    first_violation: int | None = None
    unresolved: list[int] = field(default_factory=list)
    routes: dict[str, int] = field(default_factory=dict)

    def record(self, i: int, verdict: str, route: str = "exact") -> None:
        self.checked += 1
        self.routes[route] = self.routes.get(route, 0) + 1
        if verdict == FAIL:
            if self.first_violation is None:
                self.first_violation = i
            self.status = FAIL
        elif verdict == UNRESOLVED:
            self.unresolved.append(i)
            if self.status == PASS:
                self.status = UNRESOLVED

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def as_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "i_max": self.i_max,
            "checked": self.checked,
            "status": self.status,
            "first_violation": self.first_violation,
            "unresolved": list(self.unresolved),
            "routes": dict(sorted(self.routes.items())),
        }


def _usable_max(pq: PartialQuotients, i_max: int, need_ahead: int) -> int:
    if pq.is_finite:
        return min(i_max, pq.length - 1 - need_ahead)
    return i_max


def verify_lemma_gap(pq: PartialQuotients, i_max: int) -> LemmaReport:
    """q_i >= 2 q_{i-2} for 2 <= i <= i_max."""
    report = LemmaReport("gap", i_max)
    top = _usable_max(pq, i_max, 0)
    if top < 2:
        return report
    q = denominators(pq, top + 1)
    for i in range(2, top + 1):
        report.record(i, PASS if q[i] >= 2 * q[i - 2] else FAIL, "integer")
    return report


def verify_lemma_duality(pq: PartialQuotients, i_max: int, *, exact: bool = True) -> LemmaReport:
    """(1/2) / Delta_{i-1} < q_i <= 1 / Delta_{i-1} for 1 <= i <= i_max."""
    report = LemmaReport("duality", i_max)
    top = _usable_max(pq, i_max, 0)
    if top < 1:
        return report
    q = denominators(pq, top + 1)
    for i in range(1, top + 1):
        # q_i <= 1/Delta  <=>  Delta <= 1/q_i ;  q_i > 1/(2 Delta)  <=>  Delta > 1/(2 q_i)
        upper, r1 = check_delta(pq, i - 1, "<=", Fraction(1, q[i]), exact=exact)
        lower, r2 = check_delta(pq, i - 1, ">", Fraction(1, 2 * q[i]), exact=exact)
        if FAIL in (upper, lower):
            verdict = FAIL
        elif UNRESOLVED in (upper, lower):
            verdict = UNRESOLVED
        else:
            verdict = PASS
        route = r2 if r2 != "enclosure" else r1
        report.record(i, verdict, route)
    return report


def verify_determinant(pq: PartialQuotients, i_max: int) -> LemmaReport:
    """p_i q_{i-1} - p_{i-1} q_i = (-1)^(i-1) for 0 <= i <= i_max (seeds p_{-1}=1, q_{-1}=0)."""
    report = LemmaReport("determinant", i_max)
    top = _usable_max(pq, i_max, 0)
    _, p, q = _table(pq, top + 1)
    pp, qq = (1,) + p, (0,) + q
    for i in range(0, top + 1):
        lhs = pp[i + 1] * qq[i] - pp[i] * qq[i + 1]
        report.record(i, PASS if lhs == (1 if i % 2 == 1 else -1) else FAIL, "integer")
    return report


@dataclass(frozen=True)
class SubsequenceIm:
    """Indices i_0 = 0 < i_1 < ... with floor(q_{i_{m+1}} / q_{i_m}) = K_m >= 2.

    Indices refer to the convergents of the normalized alpha (``q``).
    ``checks[m-1]`` is the certified verdict for
    Delta_{i_m - 1} < 4 Delta_{i_{m+1} - 2}, m >= 1.
    """

    indices: tuple[int, ...]
    K: tuple[int, ...]
    q: tuple[int, ...]
    checks: tuple[str, ...]

    def entries(self) -> list[tuple[int, int, int]]:
        return [(m, self.indices[m], self.K[m]) for m in range(len(self.K))]


def build_im_subsequence(pq: PartialQuotients, depth: int, *, exact: bool = True) -> SubsequenceIm:
    """Maximal chain of doubling indices within convergents 0..depth-1 of |alpha - round(alpha)|."""
    if depth < 2:
        raise CFError("depth must be >= 2")
    npq = normalize(pq)
    top = depth if npq.length is None else min(depth, npq.length)
    q = denominators(npq, top)
    indices = [0]
    while True:
        i = indices[-1]
        nxt = None
        for j in (1, 2):
            if i + j < top and q[i + j] // q[i] >= 2:
                nxt = i + j
                break
        if nxt is None:
            break
        indices.append(nxt)
    K = tuple(q[indices[m + 1]] // q[indices[m]] for m in range(len(indices) - 1))
    checks = []
    for m in range(1, len(indices) - 1):
        a, b = indices[m] - 1, indices[m + 1] - 2
        try:
            verdict, _ = check_delta_ratio(npq, a, b, Fraction(4), "<", exact=exact)
        except ExpansionTooShort:
            verdict = UNRESOLVED
        checks.append(verdict)
    return SubsequenceIm(tuple(indices), K, tuple(q), tuple(checks))
