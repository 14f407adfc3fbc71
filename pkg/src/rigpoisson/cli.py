"""Command-line interface: analyze, simulate, oracle, sample.

Exit codes: 0 success, 2 input error, 3 budget or cap refusal,
4 assertion (trend or regime) failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .covers import CliqueCover, CoverBudgetExceeded, CoverError, enumerate_proper_covers
from .graphs import (
    CapExceeded,
    DEFAULT_CAP,
    PatternError,
    PatternGraph,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    path_graph,
)
from .io import cliques_from_json, cliques_to_json, format_edge_list, read_pattern
from .oracle import BudgetExceeded, exact_distribution, exact_mean, exact_pi
from .params import ModelParams, floor_power
from .sampling import SeedSpec, project_graph, sample_incidence
from .stats import RegimeError, run_experiment, share_nonincreasing, tv_to_poisson, tv_trend_ok
from .thresholds import ThresholdReport, analyze, pi_order, pi_predict

SCHEMA_VERSION = 1
SEED_ENV = "RIGPOISSON_SEED"

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_ASSERT = 0, 2, 3, 4


class InputError(ValueError):
    pass


# -- argument parsing helpers -------------------------------------------------

def parse_alpha(text: str) -> Fraction:
    if not re.fullmatch(r"\s*\d+(/\d+)?\s*", text):
        raise argparse.ArgumentTypeError(f"alpha must be an exact rational like 3/2, got {text!r}")
    value = Fraction(text.strip())
    if value <= 0:
        raise argparse.ArgumentTypeError("alpha must be positive")
    return value


def parse_c(text: str) -> Fraction | float:
    """c as an exact rational when written as one, else a float."""
    try:
        value: Fraction | float = Fraction(text.strip()) if re.fullmatch(r"\s*\d+(/\d+)?\s*", text) else float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value for c: {text!r}") from None
    if not value > 0 or (isinstance(value, float) and not math.isfinite(value)):
        raise argparse.ArgumentTypeError("c must be positive")
    return value


def parse_int_list(text: str) -> list[int]:
    try:
        out = [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out or any(x < 1 for x in out):
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return out


_NAMED = [
    (re.compile(r"K(\d+),(\d+)"), lambda a, b: complete_bipartite(int(a), int(b))),
    (re.compile(r"K(\d+)"), lambda h: complete_graph(int(h))),
    (re.compile(r"C(\d+)"), lambda t: cycle_graph(int(t))),
    (re.compile(r"P(\d+)"), lambda h: path_graph(int(h))),
]


def load_pattern(spec: str, cap: int = DEFAULT_CAP) -> PatternGraph:
    """A file path, or a built-in name: K<h>, C<t>, P<h> (h vertices), K<k>,<t>."""
    if os.path.exists(spec):
        return read_pattern(spec, cap=cap)
    for rx, make in _NAMED:
        mt = rx.fullmatch(spec.strip())
        if mt:
            if int(mt.group(1)) > cap or sum(int(g) for g in mt.groups()) > cap:
                raise CapExceeded(f"pattern {spec} exceeds the vertex cap {cap}")
            return make(*mt.groups())
    raise InputError(f"{spec!r} is neither a file nor a built-in pattern name")


def resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


# -- JSON encoding ------------------------------------------------------------

def jsonable(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return jsonable(obj.tolist())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dump_json(payload: dict) -> str:
    return json.dumps(jsonable(payload), sort_keys=True, indent=2) + "\n"


def config_of(args: argparse.Namespace) -> dict:
    # worker count does not change results, so it stays out of the audit record
    return {k: v for k, v in vars(args).items() if k not in ("func", "threads")}


def envelope(command: str, args: argparse.Namespace, result: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "tool_version": __version__, "command": command,
            "config": config_of(args), "result": result}


def emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- analyze ------------------------------------------------------------------

def report_payload(report: ThresholdReport) -> dict:
    g = report.pattern
    covers = []
    for key, value in sorted(report.eta1.items()):
        covers.append({"cliques": cliques_to_json(key), "eta1": value,
                       "critical": any(c.cliques == key for c in report.c0)})
    c0 = []
    for cov in report.c0:
        v = report.verdicts[cov.cliques]
        table = [{"S": [x + 1 for x in range(g.h) if s >> x & 1], "eta2": e}
                 for s, e in sorted(report.eta2[cov.cliques].items())]
        c0.append({"cliques": cov.as_lists(), "total": cov.total, "verdict": v.verdict,
                   "witness": None if v.witness is None else [x + 1 for x in range(g.h) if v.witness >> x & 1],
                   "eta2": table})
    out = {
        "pattern": {"h": g.h, "edges": [[u + 1, v + 1] for u, v in g.edges]},
        "alpha": report.alpha,
        "eta0": report.eta0,
        "critical_covers": c0,
        "covers": covers,
        "all_covers_scored": report.all_covers_scored,
        "aut": report.aut,
        "strictly_alpha_balanced": report.strictly_balanced,
        "lambda0_terms": [{"c_power": k, "multiplicity": v} for k, v in report.lambda0_terms.items()],
        "regime": {"alpha_minus_2eta0": report.regime.mp2_exponent, "passes": report.regime.passes,
                   "edgeless": report.regime.edgeless, "complete": report.regime.complete,
                   "messages": list(report.regime.messages)},
        "notes": report.notes,
    }
    if report.c is not None:
        out["lambda0"] = report.lambda0()
    return out


def report_text(report: ThresholdReport) -> str:
    lines = [f"pattern: h={report.pattern.h} edges={[(u + 1, v + 1) for u, v in report.pattern.edges]}",
             f"alpha = {report.alpha}   eta0 = {report.eta0}   |aut| = {report.aut}"]
    for cov in report.c0:
        v = report.verdicts[cov.cliques]
        extra = "" if v.witness is None else f" (witness S={[x + 1 for x in range(cov.pattern.h) if v.witness >> x & 1]})"
        lines.append(f"  C0: {cov.as_lists()}  sum={cov.total}  {v.verdict}{extra}")
    if report.c is not None:
        lam = report.lambda0()
        lines.append(f"lambda0 = {lam}" + (f" = {float(lam):.6g}" if isinstance(lam, Fraction) else ""))
    lines.append(f"alpha - 2 eta0 = {report.regime.mp2_exponent} -> {'pass' if report.regime.passes else 'FAIL'}")
    lines.extend(f"note: {m}" for m in report.regime.messages + tuple(report.notes))
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    g = load_pattern(args.pattern, args.cap)
    report = analyze(g, args.alpha, args.c)
    if args.format == "text":
        emit(report_text(report), args.output)
    else:
        emit(dump_json(envelope("analyze", args, report_payload(report))), args.output)
        if args.output is None and args.table:
            sys.stderr.write(report_text(report))
    return EXIT_OK


# -- simulate -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    g = load_pattern(args.pattern, args.cap)
    args.seed = resolve_seed(args.seed)
    c = float(args.c)
    try:
        rows = run_experiment(g, args.alpha, c, args.n, args.replicates, args.seed,
                              force=args.force, min_replicates=100, workers=args.threads)
    except RegimeError as exc:
        sys.stderr.write(f"refused: {exc} (use --force to run anyway)\n")
        return EXIT_ASSERT
    result = []
    for s in rows:
        result.append({
            "n": s.n, "m": s.m, "p": s.p, "replicates": s.replicates, "lambda0": s.lam,
            "tv": s.tv, "tv_truncation": s.tv_truncation,
            "tv_ci": None if s.tv_ci is None else [s.tv_ci.low, s.tv_ci.high],
            "mean": s.mean, "variance": s.variance,
            "mean_ci": None if s.mean_ci is None else [s.mean_ci.low, s.mean_ci.high],
            "y0_mean": s.y0_mean, "y1_mean": s.y1_mean, "pmf": s.pmf,
        })
    trend = tv_trend_ok(rows)
    share = share_nonincreasing(rows)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "m", "p", "R", "lambda0", "tv", "tv_lo", "tv_hi", "mean", "variance", "y0_mean", "y1_mean"])
        for r in result:
            lo, hi = r["tv_ci"] if r["tv_ci"] else ("", "")
            w.writerow([r["n"], r["m"], repr(r["p"]), r["replicates"], repr(r["lambda0"]), repr(r["tv"]),
                        lo if lo == "" else repr(lo), hi if hi == "" else repr(hi),
                        repr(r["mean"]), repr(r["variance"]), repr(r["y0_mean"]), repr(r["y1_mean"])])
        emit(buf.getvalue(), args.output)
    else:
        payload = {"summaries": result, "tv_trend_ok": trend, "y1_share_nonincreasing": share}
        emit(dump_json(envelope("simulate", args, payload)), args.output)
    if args.assert_trend and not trend:
        sys.stderr.write("TV trend check failed\n")
        return EXIT_ASSERT
    return EXIT_OK


# -- oracle -------------------------------------------------------------------

def cmd_oracle(args) -> int:
    g = load_pattern(args.pattern, args.cap)
    report = analyze(g, args.alpha, args.c)
    if args.cover == "c0":
        covers = list(report.c0)
    elif args.cover == "all":
        covers = list(enumerate_proper_covers(g))
    elif args.cover.lstrip().startswith("["):
        try:
            covers = [CliqueCover.of(g, cliques_from_json(json.loads(args.cover)))]
        except (json.JSONDecodeError, TypeError) as exc:
            raise InputError(f"bad cover JSON: {exc}") from None
    else:
        try:
            idx = int(args.cover)
        except ValueError:
            raise InputError("--cover takes 'c0', 'all' or an index into the list of all covers") from None
        allc = list(enumerate_proper_covers(g))
        if not 0 <= idx < len(allc):
            raise InputError(f"cover index {idx} outside 0..{len(allc) - 1}")
        covers = [allc[idx]]
    c = float(args.c)
    sweep = []
    for n in args.n:
        params = ModelParams.at_threshold(n, args.alpha, c, report.eta0)
        for cov in covers:
            exact, method = exact_pi(cov, params.m, params.p, return_method=True)
            pred = pi_predict(cov, params.m, params.p)
            sweep.append({"n": n, "m": params.m, "p": params.p, "cover": cov.as_lists(),
                          "exact_pi": exact, "method": method, "pi_predict": pred,
                          "pi_order": pi_order(cov, params.m, params.p),
                          "ratio": exact / pred if pred > 0 else None})
    result: dict = {"eta0": report.eta0, "sweep": sweep}
    if args.dist_n is not None:
        n, m, p = args.dist_n, args.dist_m, args.dist_p
        if m is None or p is None:
            raise InputError("--dist-n needs --dist-m and --dist-p")
        pmf = exact_distribution(g, n, m, p)
        mean = math.fsum(k * v for k, v in enumerate(pmf))
        tv = tv_to_poisson(pmf, mean)
        result["distribution"] = {"n": n, "m": m, "p": p, "pmf": pmf, "mass": math.fsum(pmf),
                                  "mean": mean, "exact_mean": exact_mean(g, n, m, p),
                                  "tv_to_poisson_of_mean": tv.value, "tv_truncation": tv.truncation}
    emit(dump_json(envelope("oracle", args, result)), args.output)
    return EXIT_OK


# -- sample -------------------------------------------------------------------

def cmd_sample(args) -> int:
    args.seed = resolve_seed(args.seed)
    n = args.n
    if (args.alpha is None) == (args.m is None):
        raise InputError("give exactly one of --alpha or --m")
    m = floor_power(n, args.alpha) if args.m is None else args.m
    if (args.p is None) == (args.c is None):
        raise InputError("give exactly one of --p or --c (with --pattern)")
    if args.p is not None:
        p = args.p
        if not 0 <= p <= 1:
            raise InputError("p must lie in [0, 1]")
    else:
        if args.pattern is None or args.alpha is None:
            raise InputError("--c needs --pattern and --alpha to fix p = c n^-eta0")
        report = analyze(load_pattern(args.pattern, args.cap), args.alpha)
        p = ModelParams.at_threshold(n, args.alpha, float(args.c), report.eta0).p
    out = io.StringIO()
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["replicate", "n", "m", "p", "incidences", "edges"])
    for r in range(args.replicates):
        s = sample_incidence(n, m, p, SeedSpec(args.seed, r))
        host = project_graph(s)
        if args.format == "csv":
            w.writerow([r, n, m, repr(p), s.incidence_count, host.edge_count])
        else:
            out.write(f"# replicate {r} seed {args.seed} n {n} m {m} p {p!r}\n")
            out.write(format_edge_list(host))
    emit(out.getvalue(), args.output)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rigpoisson", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, pattern_required=True):
        sp.add_argument("--pattern", required=pattern_required,
                        help="edge-list/graph6 file or a name such as K3, C4, P3, K2,3")
        sp.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest allowed pattern (vertices)")
        sp.add_argument("--output", "-o", default=None, help="write here instead of stdout")

    a = sub.add_parser("analyze", help="threshold exponents, critical covers, lambda0")
    common(a)
    a.add_argument("--alpha", type=parse_alpha, required=True, help="exact rational, e.g. 3/2")
    a.add_argument("--c", type=parse_c, default=None)
    a.add_argument("--format", choices=["json", "text"], default="json")
    a.add_argument("--table", action="store_true", help="also print the text table to stderr")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="Monte Carlo TV to Poisson(lambda0) over an n grid")
    common(s)
    s.add_argument("--alpha", type=parse_alpha, required=True)
    s.add_argument("--c", type=parse_c, required=True)
    s.add_argument("--n", type=parse_int_list, required=True, help="comma-separated n grid")
    s.add_argument("--replicates", "-R", type=int, default=1000)
    s.add_argument("--seed", type=int, default=None, help=f"master seed (else ${SEED_ENV}, else 0)")
    s.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    s.add_argument("--force", action="store_true", help="run despite regime or replicate-count checks")
    s.add_argument("--assert-trend", action="store_true", help="exit 4 if the TV trend check fails")
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.set_defaults(func=cmd_simulate)

    o = sub.add_parser("oracle", help="exact induction probabilities and small exact distributions")
    common(o)
    o.add_argument("--alpha", type=parse_alpha, required=True)
    o.add_argument("--c", type=parse_c, default=Fraction(1))
    o.add_argument("--n", type=parse_int_list, default=[100, 1000, 10000, 100000, 1000000])
    o.add_argument("--cover", default="c0", help="'c0', 'all', an index into all covers, or a JSON list like [[1,2],[2,3]]")
    o.add_argument("--dist-n", type=int, default=None)
    o.add_argument("--dist-m", type=int, default=None)
    o.add_argument("--dist-p", type=float, default=None)
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("sample", help="draw G(n, m, p) and print edge lists or a CSV summary")
    common(g, pattern_required=False)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--alpha", type=parse_alpha, default=None)
    g.add_argument("--m", type=int, default=None)
    g.add_argument("--p", type=float, default=None)
    g.add_argument("--c", type=parse_c, default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--replicates", "-R", type=int, default=1)
    g.add_argument("--format", choices=["edges", "csv"], default="edges")
    g.set_defaults(func=cmd_sample)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CapExceeded, BudgetExceeded, CoverBudgetExceeded) as exc:
        sys.stderr.write(f"refused: {exc}\n")
        return EXIT_BUDGET
    except (PatternError, CoverError, InputError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
