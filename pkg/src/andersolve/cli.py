"""Command-line entry point: ``andersolve solve`` and ``andersolve suite``."""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import bench, linalg
from .driver import SolveConfig, solve
from .errors import AndersolveError
from .library import PROBLEM_NAMES, get_problem
from .safeguard import SafeguardMode
from .steppers import MuSchedule, StepperConfig

SOLVERS = {"newton": "newton", "inewton": "inexact_newton", "lm": "lm", "ilm": "inexact_lm"}
SAFEGUARDS = {"off": "off", "pre": "preasymptotic", "asym": "asymptotic"}
TRACE_FIELDS = ("k", "residual", "grad_norm", "step_norm", "eta", "gamma", "lambda", "theta", "regime", "mu")


def _mu(text):
    try:
        return MuSchedule.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(sp):
    sp.add_argument("--problem", choices=PROBLEM_NAMES, default="chandrasekhar")
    sp.add_argument("--omega", type=float, default=1.0, help="Chandrasekhar albedo in [0, 1]")
    sp.add_argument("--nodes", type=int, default=1000, help="Chandrasekhar quadrature nodes")
    sp.add_argument("--solver", choices=SOLVERS, default="newton")
    sp.add_argument("--mu", type=_mu, default=None, help="scaled:<mu0> | gradnorm | constant:<c>")
    sp.add_argument("--aa-depth", type=int, default=0)
    sp.add_argument("--safeguard", choices=SAFEGUARDS, default="off")
    sp.add_argument("--tau", type=float, default=0.1)
    sp.add_argument("--r", type=float, default=0.9)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=100)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", default=None, help="output file (default stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--rank-policy", choices=("newest", "pivoted"), default="newest")


def build_parser():
    parser = argparse.ArgumentParser(prog="andersolve", description="Anderson-accelerated perturbed Newton solvers")
    sub = parser.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run one solve and write its iteration trace")
    _common(s)
    s.add_argument("--trials", type=int, default=1, help="accepted for symmetry with suite; must be 1")
    u = sub.add_parser("suite", help="run a multi-trial benchmark and write summary rows")
    _common(u)
    u.add_argument("--trials", type=int, default=50)
    u.add_argument("--labels", default=None, help="comma-separated algorithm labels, e.g. 'Newt,AANewt(1)'")
    u.add_argument("--table", choices=sorted(bench.TABLES), default=None, help="preset variant list")
    return parser


def _config(args, mu):
    if args.aa_depth < 0:
        raise ValueError("--aa-depth must be non-negative")
    if args.max_iter < 0:
        raise ValueError("--max-iter must be non-negative")
    sg = SafeguardMode(SAFEGUARDS[args.safeguard], r=args.r, p_exponent=args.p, tau=args.tau)
    stepper = StepperConfig(SOLVERS[args.solver], mu_schedule=mu)
    return SolveConfig(
        stepper=stepper,
        aa_depth_m=args.aa_depth,
        safeguard=sg,
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed or 0,
    )


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def trace_rows(record):
    for t in record.traces:
        yield {
            "k": t.k,
            "residual": t.residual,
            "grad_norm": t.grad_norm,
            "step_norm": t.step_norm,
            "eta": t.eta,
            "gamma": t.gamma,
            "lambda": t.lam,
            "theta": t.theta,
            "regime": t.regime,
            "mu": t.mu,
        }


def trace_csv(record):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_FIELDS)
    for row in trace_rows(record):
        writer.writerow([_fmt(row[f]) for f in TRACE_FIELDS])
    return buf.getvalue()


def _json_safe(v):
    return None if isinstance(v, float) and not math.isfinite(v) else v


def trace_json(record):
    rows = [{k: _json_safe(v) for k, v in row.items()} for row in trace_rows(record)]
    return json.dumps(
        {
            "status": record.status,
            "iterations": record.iterations,
            "final_metric": _json_safe(record.final_metric),
            "trace": rows,
        },
        indent=2,
    )


def status_line(record):
    line = (
        f"status={record.status} iterations={record.iterations} "
        f"final_metric={record.final_metric:.6e} residual={record.final_residual:.6e}"
    )
    if record.message:
        line += f" message={record.message!r}"
    return line


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def run_single(args):
    if args.trials != 1:
        raise ValueError("solve runs exactly one trial; use the suite command for more")
    p = get_problem(args.problem, args.omega, args.nodes)
    cfg = _config(args, args.mu or p.mu_schedule or MuSchedule())
    if args.seed is not None and p.sample_x0 is not None:
        x0 = p.sample_x0(np.random.default_rng(args.seed))
    else:
        x0 = p.x0
    record = solve(p, x0, cfg)
    _emit(trace_csv(record) if args.format == "csv" else trace_json(record), args.out)
    print(status_line(record))
    return record


def run_suite_cmd(args):
    seed = args.seed or 0
    omega = args.omega
    if args.table is not None:
        preset = bench.TABLES[args.table]
        labels, omega = preset.labels, preset.omega
        args.problem = "chandrasekhar"
    elif args.labels:
        labels = [s.strip() for s in args.labels.split(",") if s.strip()]
    else:
        labels = None
    p = get_problem(args.problem, omega, args.nodes)
    if labels is None:
        variants = {"custom": _config(args, args.mu or p.mu_schedule or MuSchedule())}
    else:
        variants = bench.build_variants(
            labels, p, mu=args.mu, tol=args.tol, max_iter=args.max_iter, tau=args.tau, p_exponent=args.p
        )
    spec = bench.SuiteSpec(
        name=args.table or args.problem,
        problem=p,
        variants=variants,
        trials=args.trials,
        seed=seed,
        random_start=p.sample_x0 is not None,
    )
    rows = bench.run_suite(spec)
    if args.format == "csv":
        text = bench.summaries_to_csv(rows)
    else:
        text = bench.summaries_to_json(rows, spec.name, seed)
    _emit(text, args.out)
    return rows


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    linalg.TOLERANCES.rank_policy = args.rank_policy
    try:
        if args.command == "solve":
            run_single(args)
        else:
            run_suite_cmd(args)
    except (ValueError, AndersolveError) as exc:
        parser.error(str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
