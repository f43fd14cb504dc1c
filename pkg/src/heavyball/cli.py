"""Command-line entry point.

Exit codes: 0 success, 1 a check failed, 2 bad usage or unreadable input.
Results go to ``--out`` when given, otherwise to stdout.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .datasets import (RidgeExperimentConfig, load_libsvm, run_ridge_experiment,
                       synthetic_adult_like)
from .dynamics import exact_risk_trace, theorem2_bound, theorem2_log_bias_bound
from .lemmas import LEMMA_CONSTANT, SUITES, check_theorem1, check_theorem2, run_suites, theorem2_problem
from .montecarlo import RunConfig, race, run_sgd, run_shb
from .problem import NoiseModel, load_problem
from .schedules import (constant_schedule, min_feasible_T, schedule_from_dict, step_decay_schedule,
                        theorem_step_decay)

DEFAULT_SEED = 0

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad flags or input files; maps to exit code 2."""


@contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _load_problem(args):
    try:
        return load_problem(args.problem)
    except OSError as exc:
        raise UsageError(f"cannot read {args.problem}: {exc.strerror or exc}") from None
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{args.problem}: {exc}") from None


def _load_schedule(args, problem):
    data = _read_json(args.schedule)
    if not isinstance(data, dict):
        raise UsageError(f"{args.schedule}: expected a JSON object")
    # flags override file values
    if args.T is not None:
        data["T"] = args.T
    if data.get("kind") == "theorem":
        data.setdefault("L", problem.L)
        data.setdefault("kappa", problem.kappa)
    try:
        schedule = schedule_from_dict(data)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{args.schedule}: {exc}") from None
    default_beta = 0.0
    if data.get("kind") == "theorem":
        default_beta = (1 - 1 / math.sqrt(float(data["kappa"]))) ** 2
    return schedule, default_beta


def _parse_w0(text: str | None, d: int):
    if text is None:
        return None
    if Path(text).is_file():
        values = _read_json(text)
    else:
        try:
            values = [float(x) for x in text.split(",")]
        except ValueError:
            raise UsageError(f"--w0 must be a comma-separated list or a JSON file, got {text!r}") from None
    w0 = np.asarray(values, dtype=np.float64)
    if w0.shape != (d,):
        raise UsageError(f"--w0 has {w0.size} entries, problem dimension is {d}")
    return w0


def _beta(args, default: float) -> float:
    beta = default if args.beta is None else args.beta
    if not 0 <= beta < 1:
        raise UsageError(f"--beta must lie in [0, 1), got {beta}")
    return beta


# --- commands ---------------------------------------------------------------------------

def cmd_exact(args) -> int:
    problem = _load_problem(args)
    schedule, default_beta = _load_schedule(args, problem)
    w0 = _parse_w0(args.w0, problem.d)
    try:
        trace = exact_risk_trace(problem, schedule, _beta(args, default_beta), args.batch, w0,
                                 record_every=args.stride)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _sink(args.out) as fh:
        trace.to_csv(fh)
    return EXIT_OK


def cmd_simulate(args) -> int:
    problem = _load_problem(args)
    schedule, default_beta = _load_schedule(args, problem)
    w0 = _parse_w0(args.w0, problem.d)
    beta = _beta(args, default_beta)
    checkpoints = None
    if args.stride is not None:
        checkpoints = tuple(range(0, schedule.T + 1, args.stride)) + (schedule.T,)
    try:
        config = RunConfig(problem, schedule, beta, NoiseModel(batch_size=args.batch), w0,
                           args.seed, args.trials, checkpoints)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    runner = run_sgd if args.method == "sgd" else run_shb
    result = runner(config, threads=args.threads)
    with _sink(args.out) as fh:
        fh.write(result.to_csv())
    return EXIT_OK


def _emit_reports(args, reports) -> int:
    payload = [r.to_dict() for r in reports]
    text = json.dumps(payload if len(payload) > 1 else payload[0], indent=2, sort_keys=True,
                      default=lambda x: x.item() if hasattr(x, "item") else str(x))
    with _sink(args.out) as fh:
        fh.write(text + "\n")
    return EXIT_OK if all(r.status != "fail" for r in reports) else EXIT_FAIL


def cmd_verify(args) -> int:
    names = sorted(SUITES) if args.check == "all" else [args.check]
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise UsageError(f"unknown check {args.check!r}; valid names: all, {', '.join(sorted(SUITES))}")
    reports = run_suites(names, seed=args.seed, trials=args.trials, constant=args.lemma_constant,
                         threads=args.threads)
    for r in reports:
        print(f"{r.name}: {r.status} ({r.failures}/{r.trials} failures)", file=sys.stderr)
    return _emit_reports(args, reports)


def cmd_theorem1(args) -> int:
    L = args.L
    schedules = []
    for T in args.T:
        schedules += [constant_schedule(2.0 / L, T), constant_schedule(1.0 / L, T)]
        if T >= 4:
            schedules.append(step_decay_schedule(1.0 / L, 0.1, 4, T))
    try:
        report = check_theorem1(args.kappa, L, args.c0, schedules)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return _emit_reports(args, [report])


def cmd_theorem2(args) -> int:
    try:
        T = args.T if args.T is not None else min_feasible_T(args.kappa, args.C)
        report = check_theorem2(args.kappa, args.C, T, args.d, args.sigma2, args.batch, args.gap, args.L)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if report.status == "not-applicable":
        raise UsageError(f"T={T} does not meet the schedule requirements: {report.worst_witness}")
    return _emit_reports(args, [report])


def cmd_report(args) -> int:
    try:
        T = args.T if args.T is not None else min_feasible_T(args.kappa, args.C)
        schedule, report = theorem_step_decay(args.kappa, args.L, T, args.C)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = report.to_dict()
    out["min_feasible_T"] = min_feasible_T(args.kappa, args.C)
    out["stage_rates"] = list(schedule.stage_rates)
    out["stage_lengths"] = list(schedule.stage_lengths)
    if report.feasible:
        problem, _ = theorem2_problem(args.kappa, args.d, args.sigma2, args.gap, args.L)
        bias, var = theorem2_bound(problem, T, args.C, args.batch, gap=args.gap)
        out["bounds"] = {"d": args.d, "sigma2": args.sigma2, "M": args.batch, "gap": args.gap,
                         "bias_bound": bias, "log_bias_bound": theorem2_log_bias_bound(args.kappa, T, args.C, args.gap),
                         "variance_bound": var}
    else:
        out["bounds"] = None
    with _sink(args.out) as fh:
        fh.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_race(args) -> int:
    if any(k < 4 for k in args.kappa):
        raise UsageError("--kappa values must be >= 4")
    if not 0 < args.target <= 1:
        raise UsageError("--target must lie in (0, 1]")
    with _sink(args.out) as fh:
        fh.write("kappa,t_sgd,t_shb,ratio\n")
        for kappa in args.kappa:
            r = race(kappa, args.target)
            fh.write(f"{kappa:g},{r.t_sgd if r.t_sgd is not None else ''},"
                     f"{r.t_shb if r.t_shb is not None else ''},{r.ratio:.6g}\n")
    return EXIT_OK


def cmd_ridge(args) -> int:
    if args.data is None and not args.synthetic:
        raise UsageError("pass --data PATH (libsvm file) or --synthetic")
    if args.data is not None:
        try:
            dataset = load_libsvm(args.data)
        except OSError as exc:
            raise UsageError(f"cannot read {args.data}: {exc.strerror or exc}") from None
        except ValueError as exc:
            raise UsageError(f"{args.data}: {exc}") from None
    else:
        dataset = synthetic_adult_like(seed=args.seed)
    seeds = tuple(range(args.seed, args.seed + args.trials)) if args.trials else (args.seed,)
    try:
        config = RidgeExperimentConfig(
            alpha=args.alpha, batch_sizes=tuple(args.batch) if args.batch else (512, 128, 32, 8),
            epochs=args.epochs, beta=0.9 if args.beta is None else args.beta, seeds=seeds,
            n_features=args.n_features)
        result = run_ridge_experiment(dataset, config, threads=args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _sink(args.out) as fh:
        fh.write(result.runs_csv())
    if args.summary_out:
        with open(args.summary_out, "w", newline="") as fh:
            fh.write(result.summary_csv())
    else:
        sys.stderr.write(result.summary_csv())
    return EXIT_OK


# --- parser -------------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heavyball", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, seed=True, out=True, threads=True):
        if seed:
            p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"root seed (default {DEFAULT_SEED})")
        if out:
            p.add_argument("--out", help="output path (default stdout)")
        if threads:
            p.add_argument("--threads", type=_positive_int, default=1, help="worker cap")

    def problem_flags(p):
        p.add_argument("--problem", required=True, help="problem JSON file")
        p.add_argument("--schedule", required=True, help="schedule JSON file")
        p.add_argument("--beta", type=float, help="momentum (default 0, or (1 - 1/sqrt(kappa))^2 for a theorem schedule)")
        p.add_argument("--batch", type=_positive_int, default=1, help="minibatch size M")
        p.add_argument("--T", type=_positive_int, help="override the schedule's iteration count")
        p.add_argument("--w0", help="start point: comma list or JSON file (default w* + 1)")

    p = sub.add_parser("exact", help="exact expected risk trace as CSV")
    problem_flags(p)
    p.add_argument("--stride", type=_positive_int, default=1, help="record every STRIDE iterations")
    common(p, seed=False, threads=False)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("simulate", help="Monte Carlo risk estimate as CSV")
    problem_flags(p)
    p.add_argument("--method", choices=("shb", "sgd"), default="shb")
    p.add_argument("--trials", type=_positive_int, default=1000, help="replications")
    p.add_argument("--stride", type=_positive_int, help="checkpoint spacing (default: geometric)")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run lemma and theorem property checks")
    p.add_argument("check", help=f"one of: all, {', '.join(sorted(SUITES))}")
    p.add_argument("--trials", type=_positive_int, help="random trials per check")
    p.add_argument("--lemma-constant", type=float, default=LEMMA_CONSTANT,
                   help="constant in the power-norm bounds (testing hook)")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("theorem1", help="SGD lower bound on the hard instance")
    p.add_argument("--kappa", type=float, default=8.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--T", type=_positive_int, nargs="+", default=[8, 32, 128])
    common(p, seed=False, threads=False)
    p.set_defaults(func=cmd_theorem1)

    for name, func, helptext in (("theorem2", cmd_theorem2, "heavy-ball step-decay upper bounds"),
                                 ("report", cmd_report, "schedule parameters and closed-form bounds")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--kappa", type=float, default=4.0)
        p.add_argument("--C", type=float, default=2.0)
        p.add_argument("--L", type=float, default=1.0)
        p.add_argument("--T", type=_positive_int, help="iterations (default: smallest feasible)")
        p.add_argument("--d", type=_positive_int, default=2)
        p.add_argument("--sigma2", type=float, default=1.0)
        p.add_argument("--batch", type=_positive_int, default=1)
        p.add_argument("--gap", type=float, default=1.0, help="initial excess risk")
        common(p, seed=False, threads=False)
        p.set_defaults(func=func)

    p = sub.add_parser("race", help="iterations to a target risk ratio, SGD vs heavy ball")
    p.add_argument("--kappa", type=float, nargs="+", default=[1e4])
    p.add_argument("--target", type=float, default=1e-6)
    common(p, seed=False, threads=False)
    p.set_defaults(func=cmd_race)

    p = sub.add_parser("ridge", help="minibatch ridge-regression grid search")
    p.add_argument("--data", help="libsvm training file")
    p.add_argument("--synthetic", action="store_true", help="use a generated a4a-shaped stand-in")
    p.add_argument("--alpha", type=float, default=1e-3)
    p.add_argument("--batch", type=_positive_int, nargs="+", help="batch sizes (default 512 128 32 8)")
    p.add_argument("--epochs", type=_positive_int, default=100)
    p.add_argument("--n-features", type=_positive_int, default=123, help="feature dimension (default 123)")
    p.add_argument("--beta", type=float, help="heavy-ball momentum (default 0.9)")
    p.add_argument("--trials", type=_positive_int, default=5, help="number of seeds, from --seed upward")
    p.add_argument("--summary-out", help="mean/std CSV path (default stderr)")
    common(p)
    p.set_defaults(func=cmd_ridge)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"heavyball {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
