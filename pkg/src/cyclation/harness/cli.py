"""``cyclation`` command line.

Exit codes: 0 success, 2 invariant failure, 3 resource cap, 4 bad arguments.
JSON output is an envelope with the command, a spec echo, the result, package
versions and the RNG identity; the ``run`` block (timestamp, elapsed time) is
the only part that varies between identical invocations.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import subprocess
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from .. import __version__
from ..exact import (
    DEFAULT_PARTITION_CAP,
    ResourceCapError,
    cyc_class_size,
    cyclation_count,
    exact_distributions,
    odd_double_factorial,
)
from ..sampling import RNG_IDENTITY, batch_stats, sample_cyclation
from ..special import constants
from ..zmodel import ConfigurationError
from .experiments import (
    DEFAULT_GRID,
    ExperimentSpec,
    converge_longest,
    converge_shortest,
    monotone_trend,
    zsample_summary,
)
from .oracle import ORACLE_MAX_N, brute_force_enumerate
from .verify import verify_all

EXIT_OK, EXIT_INVARIANT, EXIT_CAP, EXIT_ARGS = 0, 2, 3, 4
CONVERGE_COLUMNS = ("n", "reps", "mean", "stderr", "exact", "asymptote", "ratio")


class ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ArgumentError(f"{self.prog}: error: {message}")


class Output:
    """What a subcommand produced: a JSON-able result, CSV rows and an exit code."""

    def __init__(self, result, header, rows, code=EXIT_OK, spec=None):
        self.result = result
        self.header = header
        self.rows = rows
        self.code = code
        self.spec = spec or {}


def _fraction(f: Fraction) -> dict:
    return {"decimal": repr(float(f)), "fraction": f"{f.numerator}/{f.denominator}"}


def _jsonable(x):
    if isinstance(x, Fraction):
        return _fraction(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], capture_output=True,
                             text=True, timeout=5, cwd=Path(__file__).resolve().parent)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def versions() -> dict:
    import scipy

    return {"package": __version__, "git": _git_describe(), "numpy": np.__version__, "scipy": scipy.__version__}


# -- subcommands ------------------------------------------------------------------------


def cmd_counts(a) -> Output:
    ks = [a.k] if a.k is not None else list(range(a.n + 1))
    rows = [(a.n, k, cyclation_count(a.n, k)) for k in ks]
    result = {"n": a.n, "total": odd_double_factorial(a.n),
              "counts": [{"k": k, "count": str(c)} for _, k, c in rows]}
    return Output(result, ("n", "k", "count"), rows, spec={"n": a.n, "k": a.k})


def cmd_pmf(a) -> Output:
    d = exact_distributions(a.n, a.cap)
    pmf = {"k": d.K, "longest": d.M, "shortest": d.T}[a.which]
    rows = list(pmf.rows())
    result = {
        "n": a.n, "which": a.which, "expectation": _fraction(pmf.expectation()),
        "pmf": [{"value": v, "mass": f"{p}/{q}", "float": x} for v, p, q, x in rows],
    }
    return Output(result, ("value", "numerator", "denominator", "float"), rows,
                  spec={"n": a.n, "which": a.which, "cap": a.cap})


def cmd_sample(a) -> Output:
    spec = {"n": a.n, "reps": a.reps, "seed": a.seed, "mode": a.mode, "histogram": a.histogram,
            "pairings": a.pairings}
    if a.pairings:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(a.seed)))
        lines = [sample_cyclation(a.n, rng).to_line() for _ in range(a.reps)]
        return Output({"pairings": lines}, ("pairing",), [(s,) for s in lines], spec=spec)
    s = batch_stats(a.n, a.reps, a.seed, a.mode, a.workers)
    spec["workers"] = s.workers
    result = s.as_dict()
    if a.histogram:
        if a.histogram not in s.histograms:
            raise ArgumentError(f"no histogram {a.histogram!r} in mode {a.mode}; have {sorted(s.histograms)}")
        rows = sorted(s.histograms[a.histogram].items())
        return Output(result, ("length", "count"), rows, spec=spec)
    rows = [(k, m.mean, m.variance, m.stderr) for k, m in s.moments.items()]
    return Output(result, ("statistic", "mean", "variance", "stderr"), rows, spec=spec)


def cmd_zsample(a) -> Output:
    ExperimentSpec("zsample", z=a.z, reps=a.reps, seed=a.seed)
    res = zsample_summary(a.z, a.reps, a.seed)
    rows = [(r["statistic"], r["mean"], r["stderr"], r["exact"]) for r in res["stats"]]
    rows += [(f"Pr[nu={r['n']}]", r["empirical"], r["stderr"], r["exact"]) for r in res["nu_pmf"]]
    return Output(res, ("statistic", "mean", "stderr", "exact"), rows, spec={"z": a.z, "reps": a.reps, "seed": a.seed})


def cmd_constants(a) -> Output:
    c = constants().as_dict()
    errors = c.pop("errors")
    rows = [(k, v, errors[k]) for k, v in c.items()]
    return Output({"values": c, "errors": errors}, ("name", "value", "error"), rows)


def cmd_verify(a) -> Output:
    report = verify_all(cap_n=a.cap_n, samplers=not a.skip_samplers, seed=a.seed)
    rows = [(c.name, c.passed) for c in report.checks]
    code = EXIT_OK if report.passed else EXIT_INVARIANT
    return Output(report.as_dict(), ("check", "passed"), rows, code,
                  spec={"cap_n": a.cap_n, "samplers": not a.skip_samplers, "seed": a.seed})


def cmd_converge(a) -> Output:
    grid = tuple(a.grid) if a.grid else DEFAULT_GRID[a.which]
    spec = ExperimentSpec("converge", grid=grid, reps=a.reps, seed=a.seed, workers=a.workers or 1,
                          which=a.which, format=a.format)
    res = converge_longest(spec) if a.which == "longest" else converge_shortest(spec)
    ok, problems = monotone_trend(res.records)
    rows = [tuple(r[c] for c in CONVERGE_COLUMNS) for r in res.records]
    result = {"records": res.records, "monotone_trend": {"holds": ok, "problems": problems}, **res.extra}
    return Output(result, CONVERGE_COLUMNS, rows, spec=res.spec)


def cmd_oracle(a) -> Output:
    if a.n > ORACLE_MAX_N:
        raise ResourceCapError(f"brute force is capped at n = {ORACLE_MAX_N}")
    brute = brute_force_enumerate(a.n)
    rows = []
    mismatches = 0
    for t in sorted(brute, key=lambda t: t.padded(a.n), reverse=True):
        size = cyc_class_size(t)
        mismatches += brute[t] != size
        rows.append((str(t), brute[t], size))
    result = {"n": a.n, "pairings": sum(brute.values()), "mismatches": mismatches,
              "types": [{"cycle_type": t, "brute_force": b, "class_size": s} for t, b, s in rows]}
    return Output(result, ("cycle_type", "brute_force", "class_size"), rows,
                  EXIT_OK if mismatches == 0 else EXIT_INVARIANT, spec={"n": a.n})


# -- parser -------------------------------------------------------------------------------


def _positive(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {v}")
    return v


def _nonnegative(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {v}")
    return v


def _unit_open(s: str) -> float:
    v = float(s)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"z must lie in (0, 1): {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--out", type=Path, help="write here instead of stdout")

    p = _Parser(prog="cyclation", description="Cycle structure of random cyclations.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("counts", parents=[common], help="number of n-cyclations with k cycles")
    s.add_argument("--n", type=_nonnegative, required=True)
    s.add_argument("--k", type=_nonnegative)
    s.set_defaults(func=cmd_counts)

    s = sub.add_parser("pmf", parents=[common], help="exact law of K_n, M_n or T_n")
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--which", choices=("k", "longest", "shortest"), default="k")
    s.add_argument("--cap", type=_positive, default=DEFAULT_PARTITION_CAP, help="partition enumeration cap")
    s.set_defaults(func=cmd_pmf)

    s = sub.add_parser("sample", parents=[common], help="Monte Carlo cycle statistics")
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--reps", type=_positive, required=True)
    s.add_argument("--seed", type=_nonnegative, required=True)
    s.add_argument("--workers", type=_positive)
    s.add_argument("--mode", choices=("cyclation", "permutation"), default="cyclation")
    s.add_argument("--histogram", help="emit the histogram of this statistic (M, T, L or S)")
    s.add_argument("--pairings", action="store_true", help="emit the sampled pairings themselves")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("zsample", parents=[common], help="z-model draws against exact values")
    s.add_argument("--z", type=_unit_open, required=True)
    s.add_argument("--reps", type=_positive, required=True)
    s.add_argument("--seed", type=_nonnegative, required=True)
    s.set_defaults(func=cmd_zsample)

    s = sub.add_parser("constants", parents=[common], help="the four limiting constants")
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("verify", parents=[common], help="run every invariant suite")
    s.add_argument("--cap-n", type=_positive, default=6, help="largest n for the brute-force oracle")
    s.add_argument("--seed", type=_nonnegative, default=20240601)
    s.add_argument("--skip-samplers", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("converge", parents=[common], help="Monte Carlo convergence table")
    s.add_argument("--which", choices=("longest", "shortest"), required=True)
    s.add_argument("--grid", type=_positive, nargs="+")
    s.add_argument("--reps", type=_positive, required=True)
    s.add_argument("--seed", type=_nonnegative, required=True)
    s.add_argument("--workers", type=_positive)
    s.set_defaults(func=cmd_converge)

    s = sub.add_parser("oracle", parents=[common], help="brute-force enumeration against class sizes")
    s.add_argument("--n", type=_positive, required=True)
    s.set_defaults(func=cmd_oracle)
    return p


def render(out: Output, args, elapsed: float) -> str:
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(out.header)
        w.writerows([_cell(x) for x in row] for row in out.rows)
        return buf.getvalue()
    env = {
        "command": args.command,
        "spec": {**out.spec, "format": args.format},
        "result": out.result,
        "versions": versions(),
        "rng": RNG_IDENTITY,
        "exit_code": out.code,
        "run": {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"), "elapsed": elapsed},
    }
    return json.dumps(_jsonable(env), indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ArgumentError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_ARGS
    t0 = time.perf_counter()
    try:
        out = args.func(args)
    except (ResourceCapError, ConfigurationError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ArgumentError, ValueError) as exc:
        print(f"bad arguments: {exc}", file=sys.stderr)
        return EXIT_ARGS
    text = render(out, args, time.perf_counter() - t0)
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return out.code


if __name__ == "__main__":
    sys.exit(main())
