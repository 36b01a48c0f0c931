"""Command-line front end.

Exit codes: 0 when a run completes (including unresolved or evidence-only
verdicts), 2 when a certified inequality fails, 1 on usage or runtime errors.
``--manifest`` replays a recorded run and checks the output digests.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import statistics
import sys
import time
from pathlib import Path
from typing import Callable

from . import __version__
from . import cf_engine as cf
from . import torus_measure as tm
from .alpha_factory import make_liouville, parse_alpha, probe_omega
from .exact import as_fraction, fmt_fraction
from .experiments import (
    counterexample_verify,
    coverage_probe,
    kim_statistic,
    loglaw_estimate,
    separation_demo,
    validate_case2_trace,
    verify_ez_lemma,
)
from .experiments.report import COMPLETED, FAIL, PASS, UNRESOLVED, Report, jsonable
from .experiments.statistics import draw_samples
from .svgplot import line_plot
from .targets import parse_sequence

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
TOOL = "shrinktarget"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2, which is reserved for failures
        raise UsageError(message)


# --- commands --------------------------------------------------------------------

def _alpha(args, default: str | None = None):
    text = args.alpha or default
    if text is None:
        raise UsageError("--alpha is required")
    return parse_alpha(text)


def cmd_cf(args) -> Report:
    alpha = _alpha(args)
    pq = alpha.quotients()
    depth = args.depth or 10
    if pq.is_finite:
        depth = min(depth, pq.length)
    convs = cf.convergents(pq, depth)
    quot = pq.quotients(depth)
    rows = []
    for c, a in zip(convs, quot):
        row = {"i": c.index, "a": a, "p": c.p, "q": c.q, "delta_lo": None, "delta_hi": None}
        try:
            d = cf.delta_bounds(pq, c.index)
            row["delta_lo"], row["delta_hi"] = d.lo, d.hi
        except cf.CFError:
            pass
        rows.append(row)
    return Report("cf", alpha.text, {"depth": depth}, rows, COMPLETED, {"expansion": str(pq), **pq.to_dict()},
                  ["i", "a", "p", "q", "delta_lo", "delta_hi"])


def cmd_alpha_probe(args) -> Report:
    alpha = _alpha(args)
    sigma = as_fraction(args.sigma or 0)
    res = probe_omega(alpha, sigma, args.depth or 24)
    rows = [{"i": e.i, "q": e.q, "lo": e.lo, "hi": e.hi, "lo_float": float(e.lo), "hi_float": float(e.hi)}
            for e in res.entries]
    return Report("alpha-probe", alpha.text, {"sigma": sigma, "i_max": res.i_max}, rows, res.verdict,
                  res.as_dict(), ["i", "q", "lo", "hi", "lo_float", "hi_float"])


def cmd_lemmas(args) -> Report:
    alpha = _alpha(args)
    pq = alpha.quotients()
    depth = args.depth or 30
    reps = [cf.verify_lemma_gap(pq, depth), cf.verify_lemma_duality(pq, depth), cf.verify_determinant(pq, depth)]
    rows = [r.as_dict() for r in reps]
    sub = cf.build_im_subsequence(pq, max(depth, 2))
    sub_status = FAIL if FAIL in sub.checks else (UNRESOLVED if UNRESOLVED in sub.checks else PASS)
    rows.append({"lemma": "im-subsequence", "i_max": depth, "checked": len(sub.checks), "status": sub_status,
                 "indices": list(sub.indices), "K": list(sub.K)})
    if not alpha.is_rational:
        budget = args.budget or 500
        spacing = cf.LemmaReport("spacing", depth)
        i = 1
        while i <= depth and cf.denominators(pq, i + 1)[i] <= budget:
            r = tm.verify_lemma_spacing(alpha, i, orbit_budget=budget)
            spacing.record(i, r["status"], r["route"])
            i += 1
        rows.append(spacing.as_dict())
    statuses = [r["status"] for r in rows]
    verdict = FAIL if FAIL in statuses else (UNRESOLVED if UNRESOLVED in statuses else PASS)
    return Report("lemmas", alpha.text, {"depth": depth}, rows, verdict, {},
                  ["lemma", "i_max", "checked", "status", "first_violation", "unresolved"])


def cmd_coverage(args) -> Report:
    alpha = _alpha(args)
    if not args.seq:
        raise UsageError("--seq is required")
    seq = parse_sequence(args.seq)
    return coverage_probe(alpha, seq, as_fraction(args.s or 2), epsilon=args.epsilon, budget=args.budget or 100_000,
                          sigma=args.sigma, mc_samples=args.samples or 0, seed=args.seed or 0)


def cmd_ez_lemma(args) -> Report:
    alpha = _alpha(args)
    if args.index is None:
        raise UsageError("--index is required")
    return verify_ez_lemma(alpha, args.index, as_fraction(args.epsilon or "1/10"),
                           orbit_budget=args.budget or 200_000)


def cmd_counterexample(args) -> Report:
    s = as_fraction(args.s or 2)
    alpha = parse_alpha(args.alpha) if args.alpha else make_liouville(s)
    return counterexample_verify(alpha, s, args.depth or 5, budget=args.budget or 200_000, threads=args.threads)


def _points(args, count_default: int) -> list:
    if args.points:
        return [as_fraction(v) for v in args.points.split(",") if v.strip()]
    return draw_samples(args.seed or 0, args.samples or count_default)


def cmd_kim(args) -> Report:
    alpha = _alpha(args, "quadratic:0,1,2")
    pts = _points(args, 100)
    rep = kim_statistic(alpha, pts, args.budget or 10 ** 6, threshold=as_fraction(args.threshold or "1/20"),
                        threads=args.threads)
    rep.params["prng"] = {"name": "PCG64", "seed": args.seed or 0} if not args.points else None
    return rep


def cmd_loglaw(args) -> Report:
    alpha = _alpha(args, "quadratic:0,1,2")
    pts = _points(args, 20)
    rep = loglaw_estimate(alpha, pts, args.budget or 10 ** 6, threads=args.threads)
    rep.params["prng"] = {"name": "PCG64", "seed": args.seed or 0} if not args.points else None
    return rep


def cmd_case2(args) -> Report:
    alpha = _alpha(args, "quadratic:1,2,5")
    seq = parse_sequence(args.seq or "power:c=1/256,beta=1/2")
    return validate_case2_trace(alpha, seq, as_fraction(args.s or 2), epsilon=args.epsilon, depth=args.depth or 3)


def cmd_separation(args) -> Report:
    return separation_demo(as_fraction(args.s or 2), args.budget or 10 ** 6, depth=args.depth or 12)


COMMANDS: dict[str, tuple[Callable, str]] = {
    "cf": (cmd_cf, "continued fraction, convergents and Delta enclosures (--depth = count)"),
    "alpha-probe": (cmd_alpha_probe, "certified Delta_i q_i^(1+sigma) probe (--depth = i_max)"),
    "coverage": (cmd_coverage, "inner/outer measure of orbit ball unions up to --budget points"),
    "ez-lemma": (cmd_ez_lemma, "constant-radius coverage at convergent --index"),
    "counterexample": (cmd_counterexample, "block measures for the Liouville construction (--depth = blocks)"),
    "kim": (cmd_kim, "running minima of n||n alpha - s|| (--budget = N)"),
    "loglaw": (cmd_loglaw, "sup of -log||x + n alpha|| / log n (--budget = N)"),
    "case2-trace": (cmd_case2, "small-radius regime checks along the doubling subsequence"),
    "separation": (cmd_separation, "power sums against condition (*) for two radius families"),
    "lemmas": (cmd_lemmas, "gap, duality, determinant, subsequence and spacing checks (--depth = i_max)"),
}


# --- plotting ----------------------------------------------------------------------

def plot_series(rep: Report) -> tuple[dict, dict]:
    rows = rep.checkpoints
    if rep.op == "coverage":
        return ({"inner": [(r["N"], r["inner_float"]) for r in rows],
                 "outer": [(r["N"], r["outer_float"]) for r in rows]}, {"logx": True})
    if rep.op == "counterexample":
        return ({"outer measure": [(r["n"], r["outer_float"]) for r in rows],
                 "4/n^2": [(r["n"], float(r["bound"])) for r in rows]}, {"logy": True})
    if rep.op == "alpha-probe":
        return ({"upper": [(r["i"], r["hi_float"]) for r in rows],
                 "lower": [(r["i"], r["lo_float"]) for r in rows]}, {"logy": True})
    if rep.op == "kim":
        cps = rep.params["checkpoints"]
        thr = rep.params["threshold"]
        return ({"fraction below": [(c, sum(r[f"min@{c}"] < thr for r in rows) / max(len(rows), 1)) for c in cps]},
                {"logx": True})
    if rep.op == "loglaw":
        cps = rep.params["checkpoints"]
        return ({"median sup": [(c, statistics.median(r[f"sup@{c}"] for r in rows)) for c in cps],
                 "max sup": [(c, max(r[f"sup@{c}"] for r in rows)) for c in cps]}, {"logx": True})
    if rep.op == "separation":
        out = {}
        for r in rows:
            out.setdefault(f"{r['panel']}:{r['series']}", []).append((r["index"], r["partial_sum"]))
        return out, {"logx": True}
    return {}, {}


# --- output and manifests -------------------------------------------------------------

def _formats(args) -> list[str]:
    fmts = [f for f in ("json", "csv", "svg") if getattr(args, f)]
    return fmts or ["json"]


def render(rep: Report, fmt: str) -> str:
    if fmt == "json":
        return rep.to_json()
    if fmt == "csv":
        return rep.to_csv()
    series, kw = plot_series(rep)
    return line_plot(series, title=f"{rep.op} {rep.alpha or ''}".strip(), **kw)


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _strip_out(argv: list[str]) -> list[str]:
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--out":
            skip = True
            continue
        if tok.startswith("--out="):
            continue
        out.append(tok)
    return out


def write_outputs(rep: Report, args, argv: list[str], out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    digests = {}
    for fmt in _formats(args):
        name = f"{rep.op}.{fmt}"
        (out_dir / name).write_text(render(rep, fmt), encoding="utf-8")
        digests[name] = sha256_file(out_dir / name)
    manifest = {
        "tool": TOOL,
        "version": __version__,
        "argv": _strip_out(argv),
        "command": args.command,
        "params": jsonable({k: v for k, v in vars(args).items() if k not in ("out", "manifest")}),
        "alpha": rep.alpha,
        "seq": rep.params.get("seq"),
        "seed": args.seed,
        "prng": "PCG64",
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "outputs": digests,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


def replay(manifest_path: Path, out_dir: Path | None) -> int:
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    out_dir = out_dir or manifest_path.parent / "replay"
    argv = list(manifest["argv"]) + ["--out", str(out_dir)]
    code = main(argv)
    if code == EXIT_ERROR:
        return code
    bad = [name for name, digest in manifest["outputs"].items()
           if not (out_dir / name).exists() or sha256_file(out_dir / name) != digest]
    if bad:
        print(f"replay mismatch: {', '.join(bad)}", file=sys.stderr)
        return EXIT_FAIL
    print(f"replay ok: {len(manifest['outputs'])} output(s) identical", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--alpha", help="rational:p/q | quadratic:P,Q,D | rule:liouville:sigma=r | "
                                        "rule:bounded:bound=n,seed=n (append ;normalized to reduce mod 1)")
    common.add_argument("--seq", help="power:c=r,beta=r | loglaw:s=r | prop21:s=r,alpha=spec | prop62:s=r | "
                                      "delta:eps=r,alpha=spec | const:r=r | file:path")
    common.add_argument("--s", help="exponent s (rational)")
    common.add_argument("--sigma", help="Diophantine exponent sigma (rational)")
    common.add_argument("--depth", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--epsilon", help="rational epsilon")
    common.add_argument("--seed", type=int, help="PCG64 seed for sampled points")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--index", type=int, help="convergent index (ez-lemma)")
    common.add_argument("--samples", type=int, help="sample count (kim, loglaw, coverage Monte Carlo)")
    common.add_argument("--points", help="explicit comma-separated rational sample points")
    common.add_argument("--threshold", help="running-min threshold (kim)")
    common.add_argument("--json", action="store_true")
    common.add_argument("--csv", action="store_true")
    common.add_argument("--svg", action="store_true")
    common.add_argument("--out", help="output directory (writes report files and manifest.json)")

    parser = _Parser(prog=TOOL, description="Shrinking targets for circle rotations: exact checks and experiments.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    parser.add_argument("--manifest", help="replay a recorded run manifest and compare digests")
    parser.add_argument("--out", dest="replay_out", help="output directory for --manifest replay")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.manifest:
            if args.command:
                raise UsageError("--manifest replays a run; do not combine it with a subcommand")
            return replay(Path(args.manifest), Path(args.replay_out) if args.replay_out else None)
        if not args.command:
            raise UsageError("a subcommand is required")
        rep = COMMANDS[args.command][0](args)
    except UsageError as exc:
        print(f"{TOOL}: usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # runtime failures (bad specs, budgets) map to exit 1
        print(f"{TOOL}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.out:
        write_outputs(rep, args, argv, Path(args.out))
    else:
        for fmt in _formats(args):
            sys.stdout.write(render(rep, fmt))
    return EXIT_FAIL if rep.verdict == FAIL else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
