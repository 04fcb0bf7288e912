"""Command-line front door.

Every invocation prints one JSON document on stdout:
``{"command", "params", "result", "diagnostics", "version"}``. Enclosures are
written as ``[lo, hi]`` pairs; non-finite numbers become the strings "inf",
"-inf" and "nan" so the output stays standard JSON.

Exit codes: 0 success, 1 negative verdict, 2 invalid input, 3 numerical
non-convergence or an unresolved supremum.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, is_dataclass

import numpy as np

from . import __version__
from . import analysis
from .errors import DomainError, HardyError, IllConditioned, Inconclusive, NotConverged, NotFound, TailUnknown
from .halfline_operator import FAILS, hardy_weight, weight_comparison
from .muckenhoupt import critical_counterexample_ratio, hardy_constant_bounds
from .sharpness import Bounds, RayleighProblem, minimize_rayleigh, sharp_constant
from .weights import Enclosure, format_weight, parse_weight

SCHEMA_VERSION = f"hardyline/{__version__}/1"

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def to_jsonable(obj):
    """Recursively convert results to JSON-safe values."""
    if isinstance(obj, Enclosure):
        return [to_jsonable(obj.lo), to_jsonable(obj.hi)]
    if isinstance(obj, Bounds):
        return [to_jsonable(obj.lo), to_jsonable(obj.hi)]
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj) if not f.name.startswith("_")}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "value"])
        for n, v in rows:
            writer.writerow([int(n), repr(float(v))])


def _jobs(args) -> int:
    if args.jobs is not None:
        return max(int(args.jobs), 1)
    env = os.environ.get("HARDYLINE_JOBS")
    if env:
        try:
            return max(int(env), 1)
        except ValueError as exc:
            raise DomainError(f"HARDYLINE_JOBS must be an integer, got {env!r}") from exc
    return 1


# ---------------------------------------------------------------- commands


def cmd_sharp(args):
    val = sharp_constant(args.alpha, args.p)
    if val is None:
        return {"value": None, "reason": "critical"}, EXIT_OK, {}
    if isinstance(val, Bounds):
        return {"value": None, "bounds": val, "reason": "alpha < 0: bracket only"}, EXIT_OK, {}
    return {"value": val.value}, EXIT_OK, {}


def cmd_muckenhoupt(args):
    mu, nu = parse_weight(args.mu), parse_weight(args.nu)
    rep = hardy_constant_bounds(mu, nu, args.p, args.rmax)
    result = to_jsonable(rep)
    result["c_bracket"] = [result["c_lower"], result["c_upper"]]
    if args.kind != "both":
        drop = "2" if args.kind == "1" else "1"
        result.pop(f"b{drop}")
        result.pop(f"argmax_r{drop}", None)
    return result, EXIT_OK, {"scanned_to": rep.scanned_to, "certified": rep.certified}


def cmd_weight(args):
    nu = parse_weight(args.nu)
    a, b = _index_range(args)
    hw = hardy_weight(nu, args.p, b)
    vals = hw.values[a - 1:]
    unc = np.broadcast_to(hw.uncertainty, hw.values.shape)[a - 1:]
    n = np.arange(a, b + 1)
    if args.csv:
        _write_csv(args.csv, zip(n, vals))
    result = {"nu": format_weight(nu), "branch": hw.branch,
              "values": [[int(k), v, u] for k, v, u in zip(n, vals.tolist(), unc.tolist())]}
    return result, EXIT_OK, {}


def _index_range(args):
    if (args.N is None) == (args.n is None):
        raise DomainError("give exactly one of --N or --n a..b")
    if args.N is not None:
        return 1, int(args.N)
    lo, sep, hi = args.n.partition("..")
    try:
        a, b = int(lo), int(hi)
    except ValueError as exc:
        raise DomainError(f"--n expects a..b, got {args.n!r}") from exc
    if not sep or a < 1 or b < a:
        raise DomainError(f"--n expects 1 <= a <= b, got {args.n!r}")
    return a, b


def cmd_compare(args):
    nu, mu = parse_weight(args.nu), parse_weight(args.mu)
    v = weight_comparison(nu, args.p, mu, args.N, args.scale)
    return to_jsonable(v), (EXIT_NEGATIVE if v.verdict == FAILS else EXIT_OK), {"heuristic": v.heuristic}


def cmd_rayleigh(args):
    if args.alpha is None and (args.mu is None or args.nu is None):
        raise DomainError("give --alpha or both --mu and --nu")
    mu = parse_weight(args.mu) if args.mu else None
    nu = parse_weight(args.nu) if args.nu else None
    prob = RayleighProblem(args.p, args.N, args.M, alpha=args.alpha, mu=mu, nu=nu)
    res = minimize_rayleigh(prob, method=args.method, tol=args.tol, max_iter=args.max_iter)
    x = res.minimizer
    if x.size and x[np.argmax(np.abs(x))] < 0:
        x = -x
    n = np.arange(res.M, res.M + x.size)
    if args.csv:
        _write_csv(args.csv, zip(n, x))
    result = {"value": res.value, "minimizer": [[int(k), float(v)] for k, v in zip(n, x)],
              "method": res.method, "iterations": res.iterations, "residual": res.residual}
    if res.bracket is not None:
        result["bracket"] = list(res.bracket)
    diag = {"converged": res.converged, "residual_floor": res.residual_floor}
    return result, (EXIT_OK if res.converged else EXIT_NUMERIC), diag


def _run_tasks(tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [f(*a) for f, a in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        futures = [ex.submit(f, *a) for f, a in tasks]
        return [fu.result() for fu in futures]


def cmd_verify(args):
    opts = {"part": args.part, "gamma": args.gamma, "nmax": args.nmax, "alpha": args.alpha,
            "p": args.p, "samples": args.samples, "seed": args.seed, "dense": args.dense}
    if (args.alpha is None) != (args.p is None) and args.suite in ("cor43", "alternate", "stability"):
        raise DomainError("--alpha and --p must be given together")
    tasks = analysis.suite_tasks(args.suite, **opts)
    points = _run_tasks(tasks, _jobs(args))
    res = analysis.aggregate(args.suite, points, args.tolerance)
    result = {"suite": res.name, "min_margin": res.min_margin, "location": res.location,
              "passed": res.passed, "points": [to_jsonable(p) for p in res.points]}
    return result, (EXIT_OK if res.passed else EXIT_NEGATIVE), {"grid_points": len(res.points)}


def cmd_expand(args):
    powers = [int(t) for t in args.powers.split(",") if t.strip()]
    grid = analysis.default_grid()
    n, v = analysis.normalised_weight(args.alpha, args.p, grid)
    fit = analysis.asymptotic_fit(v, n, powers, extra=args.extra)
    if args.csv:
        _write_csv(args.csv, zip(n, v))
    result = {"powers": list(fit.powers), "coefficients": list(fit.coefficients),
              "residual": fit.residual, "condition": fit.condition, "grid": [int(k) for k in n]}
    if args.p == 2:
        exp = analysis.expected_coefficients(args.alpha)
        result["reference"] = {str(k): exp[k] for k in (2, 3) if k in powers}
    return result, EXIT_OK, {}


def cmd_stability(args):
    if args.u:
        u = np.array([float(t) for t in args.u.split(",")])
        rep = analysis.stability_margin(u, args.alpha, args.p)
        ok = rep.margin >= -1e-12 * (abs(rep.energy) + rep.remainder_norm_p)
        return to_jsonable(rep), (EXIT_OK if ok else EXIT_NEGATIVE), {}
    pt = analysis.stability_point(args.alpha, args.p, args.samples, args.seed)
    ok = pt.extra["min_relative_margin"] >= -1e-12
    result = {"min_margin": pt.min_margin, "location": pt.location, **pt.extra}
    return to_jsonable(result), (EXIT_OK if ok else EXIT_NEGATIVE), {"seed": args.seed}


def cmd_critical_ratio(args):
    Ns = [int(t) for t in args.N.split(",")]
    rows = [[N, critical_counterexample_ratio(N, args.p)] for N in Ns]
    if args.csv:
        _write_csv(args.csv, rows)
    return {"ratios": rows}, EXIT_OK, {}


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hardyline", description="Discrete weighted p-Hardy inequalities on the half-line.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--json", action="store_true", help="JSON output (always on)")
        sp.add_argument("--jobs", type=int, default=None, help="worker processes (env HARDYLINE_JOBS)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--csv", default=None, metavar="PATH", help="write n,value rows for sequence results")
        return sp

    sp = add("sharp", cmd_sharp, "sharp constant for power weights")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)

    sp = add("muckenhoupt", cmd_muckenhoupt, "Muckenhoupt constants and the Hardy constant bracket")
    sp.add_argument("--mu", required=True)
    sp.add_argument("--nu", required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--rmax", type=int, default=100_000)
    sp.add_argument("--kind", choices=("1", "2", "both"), default="both")

    sp = add("weight", cmd_weight, "optimal Hardy weight of nu")
    sp.add_argument("--nu", required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--N", type=int, default=None, help="values at 1..N")
    sp.add_argument("--n", default=None, metavar="A..B", help="values at A..B")

    sp = add("compare", cmd_compare, "compare the optimal weight of nu with mu")
    sp.add_argument("--nu", required=True)
    sp.add_argument("--mu", required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--N", "--window", dest="N", type=int, required=True)
    sp.add_argument("--scale", type=float, default=1.0)

    sp = add("rayleigh", cmd_rayleigh, "minimise the truncated Rayleigh quotient")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--mu", default=None)
    sp.add_argument("--nu", default=None)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--M", type=int, default=1)
    sp.add_argument("--method", choices=("auto", "exact", "descent"), default="auto")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--max-iter", dest="max_iter", type=int, default=2000)

    sp = add("verify", cmd_verify, "run a verification suite")
    sp.add_argument("--suite", required=True, choices=analysis.SUITES)
    sp.add_argument("--part", choices=("i", "ii", "iii"), default=None)
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--nmax", type=int, default=None)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--dense", type=int, default=None, help="dense x-grid size for the lemma42 suite")
    sp.add_argument("--tolerance", type=float, default=0.0)

    sp = add("expand", cmd_expand, "fit the expansion of w(n)/n^alpha for nu = n^alpha")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--powers", default="2,3")
    sp.add_argument("--extra", type=int, default=3)

    sp = add("stability", cmd_stability, "stability margin of one vector or a seeded batch")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--u", default=None, help="comma-separated u_1,...,u_K")
    sp.add_argument("--samples", type=int, default=1000)

    sp = add("critical-ratio", cmd_critical_ratio, "energy/mass ratio of the critical ramp")
    sp.add_argument("--N", required=True, help="one or more comma-separated N")
    sp.add_argument("--p", type=float, default=2.0)
    return parser


def dispatch(argv):
    """Run one command; returns (document, exit code)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return {"command": None, "error": str(exc), "version": SCHEMA_VERSION}, EXIT_INPUT
    if args.command is None:
        return {"command": None, "error": parser.format_usage(), "version": SCHEMA_VERSION}, EXIT_INPUT
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command", "json", "jobs")}
    doc = {"command": args.command, "params": to_jsonable(params), "version": SCHEMA_VERSION}
    t0 = time.perf_counter()
    diag = {}
    try:
        result, code, diag = args.func(args)
    except NotConverged as exc:
        result, code = {"error": str(exc)}, EXIT_NUMERIC
        if exc.result is not None:
            result["value"] = exc.result.value
    except (Inconclusive, TailUnknown, IllConditioned) as exc:
        result, code = {"error": str(exc), "kind": type(exc).__name__}, EXIT_NUMERIC
    except NotFound as exc:
        result, code = {"error": str(exc), "kind": "NotFound"}, EXIT_NEGATIVE
    except (DomainError, ValueError, FileNotFoundError) as exc:
        result = {"error": str(exc), "kind": type(exc).__name__}
        doc["usage"] = parser.format_usage()
        code = EXIT_INPUT
    except HardyError as exc:
        result, code = {"error": str(exc), "kind": type(exc).__name__}, EXIT_NUMERIC
    doc["result"] = to_jsonable(result)
    diag = dict(diag)
    diag["runtime_ms"] = round(1000.0 * (time.perf_counter() - t0), 3)
    doc["diagnostics"] = to_jsonable(diag)
    return doc, code


def main(argv=None) -> int:
    doc, code = dispatch(sys.argv[1:] if argv is None else argv)
    json.dump(doc, sys.stdout, sort_keys=True, allow_nan=False)
    sys.stdout.write("\n")
    if code == EXIT_INPUT:
        sys.stderr.write(str(doc.get("error") or doc.get("result", {}).get("error", "")) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
