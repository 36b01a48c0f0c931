"""Rotation numbers with prescribed Diophantine behaviour, and an Omega(sigma) probe.

Text forms understood by :func:`parse_alpha`::

    rational:p/q
    quadratic:P,Q,D               alpha = (P + sqrt(D)) / Q
    rule:liouville:sigma=<r>
    rule:bounded:bound=<n>,seed=<n>

Membership of alpha in Omega(sigma) cannot be decided by finite probing.
:func:`probe_omega` only reports whether the certified values of
Delta_i * q_i^(1 + sigma) show a decay witness.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import cf_engine as cf
from .exact import Root, as_fraction, fmt_fraction, dyadic_mul, rel_ceil, rel_floor

CONSISTENT = "consistent-with-membership"
WITNESS = "witness-of-failure"


class AlphaSpecError(ValueError):
    pass


@dataclass(frozen=True)
class AlphaSpec:
    """A rotation number given by an exact recipe.

    ``params`` is a tuple of (key, value) string pairs so specs are hashable
    and serialize verbatim.  ``normalized`` subtracts the nearest integer,
    which leaves the rotation unchanged.
    """

    kind: str
    params: tuple[tuple[str, str], ...]
    normalized: bool = False

    def param(self, key: str) -> str:
        return dict(self.params)[key]

    @property
    def text(self) -> str:
        d = dict(self.params)
        if self.kind == "rational":
            body = f"rational:{d['p']}/{d['q']}"
        elif self.kind == "quadratic":
            body = f"quadratic:{d['P']},{d['Q']},{d['D']}"
        else:
            rest = ",".join(f"{k}={v}" for k, v in self.params if k != "name")
            body = f"rule:{d['name']}:{rest}"
        return body + (";normalized" if self.normalized else "")

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    def quotients(self) -> cf.PartialQuotients:
        pq = _build_quotients(self.kind, self.params)
        if self.normalized:
            pq = _shift_to_nearest(pq)
        return pq

    def with_normalization(self, flag: bool = True) -> "AlphaSpec":
        return AlphaSpec(self.kind, self.params, flag)

    def __str__(self) -> str:
        return self.text


def _build_quotients(kind: str, params: tuple[tuple[str, str], ...]) -> cf.PartialQuotients:
    d = dict(params)
    if kind == "rational":
        return cf.expand_rational(int(d["p"]), int(d["q"]))
    if kind == "quadratic":
        return cf.expand_quadratic(int(d["P"]), int(d["Q"]), int(d["D"]))
    if kind == "rule":
        name = d["name"]
        if name == "liouville":
            return _liouville_quotients(as_fraction(d["sigma"]))
        if name == "bounded":
            return _bounded_quotients(int(d["bound"]), int(d["seed"]))
        raise AlphaSpecError(f"unknown quotient rule {name!r}")
    raise AlphaSpecError(f"unknown alpha kind {kind!r}")


def _shift_to_nearest(pq: cf.PartialQuotients) -> cf.PartialQuotients:
    """Subtract round(alpha) so alpha lands in (-1/2, 1/2]; only a0 (and the surd) move."""
    # frac(alpha) = [0; a1, ...] exceeds 1/2 exactly when a1 == 1 (canonical form)
    a1 = pq.quotient(1) if (pq.length is None or pq.length > 1) else None
    k = pq.a0 + (1 if a1 == 1 else 0)
    surd = None
    if pq.surd is not None:
        P, Q, D = pq.surd
        surd = (P - k * Q, Q, D)
    return cf.PartialQuotients(pq.a0 - k, pq.terms, pq.period, pq.rule, surd, pq.depth_cap, pq.max_bits)


def _bounded_draw(seed: int, i: int, bound: int) -> int:
    digest = hashlib.blake2b(f"{seed}:{i}".encode(), digest_size=8).digest()
    return 1 + int.from_bytes(digest, "big") % bound


def _bounded_quotients(bound: int, seed: int) -> cf.PartialQuotients:
    if bound < 1:
        raise AlphaSpecError("bound must be >= 1")

    def rule(i: int, qs: Sequence[int]) -> int:
        return _bounded_draw(seed, i, bound)

    r = cf.QuotientRule("bounded", (("bound", str(bound)), ("seed", str(seed))), rule)
    return cf.PartialQuotients(_bounded_draw(seed, 0, bound), rule=r)


def _liouville_quotients(sigma: Fraction) -> cf.PartialQuotients:
    if sigma <= 0:
        raise AlphaSpecError("sigma must be > 0")

    def rule(i: int, qs: Sequence[int]) -> int:
        # a_{k+1} = max(2, k * ceil(q_k^sigma)) with k = i - 1
        k = i - 1
        return max(2, k * Root.power(qs[k], sigma).ceil())

    r = cf.QuotientRule("liouville", (("sigma", str(sigma)),), rule)
    return cf.PartialQuotients(0, rule=r)


# --- constructors -----------------------------------------------------------------

def rational(p: int, q: int) -> AlphaSpec:
    if q < 1:
        raise AlphaSpecError("q must be >= 1")
    return AlphaSpec("rational", (("p", str(p)), ("q", str(q))))


def quadratic(P: int, Q: int, D: int) -> AlphaSpec:
    spec = AlphaSpec("quadratic", (("P", str(P)), ("Q", str(Q)), ("D", str(D))))
    spec.quotients()  # validates irrationality and divisibility
    return spec


def sqrt2() -> AlphaSpec:
    return quadratic(0, 1, 2)


def sqrt3() -> AlphaSpec:
    return quadratic(0, 1, 3)


def golden() -> AlphaSpec:
    return quadratic(1, 2, 5)


def make_badly_approximable(bound: int, seed: int) -> AlphaSpec:
    """Quotients drawn deterministically from [1, bound]; such alpha lie in Omega(0)."""
    if bound < 1:
        raise AlphaSpecError("bound must be >= 1")
    return AlphaSpec("rule", (("name", "bounded"), ("bound", str(bound)), ("seed", str(seed))))


def make_liouville(sigma) -> AlphaSpec:
    """Quotients a_{i+1} = max(2, i * ceil(q_i^sigma)), which puts alpha outside Omega(sigma).

    Then Delta_i < 1/(a_{i+1} q_i) <= 1/(i q_i^(1+sigma)), and the growing
    factor i rules out every constant C.  This is one admissible growth rule
    among many.
    """
    sigma = as_fraction(sigma)
    if sigma <= 0:
        raise AlphaSpecError("sigma must be > 0")
    return AlphaSpec("rule", (("name", "liouville"), ("sigma", str(sigma))))


def parse_alpha(text: str) -> AlphaSpec:
    """Parse the CLI text form of an alpha spec."""
    raw = text.strip()
    normalized = False
    if raw.endswith(";normalized"):
        raw, normalized = raw[: -len(";normalized")], True
    try:
        kind, _, body = raw.partition(":")
        if kind == "rational":
            p, _, q = body.partition("/")
            spec = rational(int(p), int(q or 1))
        elif kind == "quadratic":
            P, Q, D = (int(v) for v in body.split(","))
            spec = quadratic(P, Q, D)
        elif kind == "rule":
            name, _, argstr = body.partition(":")
            args = dict(kv.split("=", 1) for kv in argstr.split(",") if kv)
            if name == "liouville":
                spec = make_liouville(as_fraction(args["sigma"]))
            elif name == "bounded":
                spec = make_badly_approximable(int(args["bound"]), int(args.get("seed", 0)))
            else:
                raise AlphaSpecError(f"unknown rule {name!r}")
        else:
            raise AlphaSpecError(f"unknown alpha kind {kind!r}")
    except AlphaSpecError:
        raise
    except (ValueError, KeyError, ZeroDivisionError, cf.CFError) as exc:
        raise AlphaSpecError(f"malformed alpha spec {text!r}: {exc}") from None
    return spec.with_normalization(normalized)


# --- Omega(sigma) probe ------------------------------------------------------------

@dataclass
class ProbeEntry:
    i: int
    q: int
    lo: Fraction
    hi: Fraction


@dataclass
class OmegaProbeResult:
    sigma: Fraction
    i_min: int
    i_max: int
    k_max: int
    entries: list[ProbeEntry]
    inf_statistic: tuple[Fraction, Fraction]
    verdict: str
    trend_depth: int
    witnesses: list[tuple[int, int, Fraction, Fraction]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "sigma": fmt_fraction(self.sigma),
            "i_min": self.i_min,
            "i_max": self.i_max,
            "k_max": str(self.k_max),
            "trend_depth": self.trend_depth,
            "inf_statistic": [fmt_fraction(self.inf_statistic[0]), fmt_fraction(self.inf_statistic[1])],
            "inf_statistic_float": [float(self.inf_statistic[0]), float(self.inf_statistic[1])],
            "verdict": self.verdict,
            "witnesses": [
                {"m": m, "k": str(k), "lo": fmt_fraction(lo), "hi": fmt_fraction(hi)}
                for m, k, lo, hi in self.witnesses
            ],
        }


def probe_omega(alpha: AlphaSpec, sigma, i_max: int, *, i_min: int = 2, trend_depth: int = 8,
                refine: int = 4, bits: int = 64) -> OmegaProbeResult:
    """Certified enclosures of Delta_i * q_i^(1+sigma) for i_min <= i <= i_max.

    Only k = q_i is probed: convergent denominators minimise ||k alpha|| over
    k <= q_{i+1}, so they carry the infimum.  The verdict is a witness of
    failure when, for every m <= trend_depth, some certified upper bound
    drops below 1/m.  Anything else is reported as consistent with
    membership.

    For fast-growing expansions the probe stops at the last index whose
    q_{i+1} fits the bit budget; ``i_max`` in the result is the index reached.

    ``refine`` extra convergents tighten each Delta_i enclosure (limited by
    the expansion's bit budget).  With the default i_min = 2, the first two
    convergents, which only fix the constant and not the decay, are skipped.
    """
    sigma = as_fraction(sigma)
    if sigma < 0:
        raise AlphaSpecError("sigma must be >= 0")
    if i_max < 2:
        raise AlphaSpecError("i_max must be >= 2")
    if alpha.is_rational:
        raise AlphaSpecError("probe_omega needs an irrational alpha")
    pq = alpha.quotients()
    exponent = 1 + sigma
    entries = []
    reached = i_min - 1
    for i in range(i_min, i_max + 1):
        try:
            q = cf.denominators(pq, i + 2)[i]
        except cf.DepthExceeded:
            # fast-growing expansions hit the bit budget; probe what is available
            break
        reached = i
        lo, hi = _best_delta(pq, i, refine, bits)
        # round outward first so the products stay small
        lo, hi = rel_floor(lo, bits + 8), rel_ceil(hi, bits + 8)
        plo, phi = Root.power(q, exponent).bounds(bits)
        plo, phi = rel_floor(plo, bits + 8), rel_ceil(phi, bits + 8)
        entries.append(ProbeEntry(i, q, dyadic_mul(lo, plo), dyadic_mul(hi, phi)))
    if not entries:
        raise AlphaSpecError(f"no convergent in [{i_min}, {i_max}] fits the bit budget")
    i_max = reached
    inf_lo = min(e.lo for e in entries)
    inf_hi = min(e.hi for e in entries)
    witnesses = []
    for m in range(1, trend_depth + 1):
        hit = next((e for e in entries if e.hi < Fraction(1, m)), None)
        if hit is None:
            break
        witnesses.append((m, hit.q, hit.lo, hit.hi))
    verdict = WITNESS if len(witnesses) == trend_depth else CONSISTENT
    k_max = entries[-1].q
    return OmegaProbeResult(sigma, i_min, i_max, k_max, entries, (inf_lo, inf_hi), verdict,
                            trend_depth, witnesses if verdict == WITNESS else [])


def _best_delta(pq: cf.PartialQuotients, i: int, refine: int, bits: int = 64) -> tuple[Fraction, Fraction]:
    d = cf.delta_bounds(pq, i)
    best = (d.lo, d.hi)
    q = cf.denominators(pq, i + 2)
    if q[i + 1] >= q[i] << bits:
        # relative width q_i / q_{i+1} is already below 2^-bits
        return best
    for extra in range(1, refine + 1):
        try:
            best = cf.delta_refined(pq, i, extra)
        except cf.DepthExceeded:
            break
    return best


def diophantine_constant(alpha: AlphaSpec, sigma, i_max: int = 24, *, i_min: int = 2) -> Fraction:
    """Certified lower bound of the probed infimum of Delta_i q_i^(1+sigma)."""
    return probe_omega(alpha, sigma, i_max, i_min=i_min).inf_statistic[0]
