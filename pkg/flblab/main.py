"""Command-line entry point: ``flblab <command> ...``.

Exit codes: 0 on success, 1 when a check or experiment found violations,
2 on invalid input or a failed run.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from flblab.config import settings
from flblab.engine import run, write_trace_csv
from flblab.exceptions import FlbLabError
from flblab.experiments import EXPERIMENTS, default_config_path, load_config
from flblab.generators import (
    gen_batch_homogeneous,
    gen_lowerbound_distribution,
    gen_random_poisson,
    gen_random_small,
    gen_upper_triangular,
    gen_worstcase_geometric,
)
from flblab.invariants import (
    Verdict,
    check_corollary_bound,
    check_feasibility_condition_integer,
    check_feasibility_condition_real,
    check_invariant_integer,
    summarize,
)
from flblab.models import CommitMode, DurationMode
from flblab.output import write_csv
from flblab.params import (
    solve_fixed_reward_int,
    solve_fixed_reward_real,
    solve_flbopt_int,
    solve_flbopt_real,
)
from flblab.policies import FlbPolicy, parse_policy
from flblab.serialization import read_instance, write_instance

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_ERROR = 2


def _float(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    policy = parse_policy(args.policy, instance)
    trace = run(instance, policy, CommitMode(args.mode))
    path = Path(args.trace) if args.trace else Path(settings.out_dir) / "trace.csv"
    write_trace_csv(trace, path)
    print(f"policy={trace.policy}")
    print(f"total_reward={trace.total_reward!r}")
    print(f"accepted={len(trace.assignments())}/{instance.num_jobs}")
    if trace.capacity_violations:
        print(f"capacity_violations={len(trace.capacity_violations)}")
    return EXIT_OK


def cmd_solve_params(args: argparse.Namespace) -> int:
    if args.mode == "int":
        solved = solve_flbopt_int(args.R, int(args.D), args.cmin)
    elif args.mode == "real":
        solved = solve_flbopt_real(args.R, args.D, args.cmin)
    elif args.mode == "fixed-int":
        solved = solve_fixed_reward_int(int(args.D))
    else:
        solved = solve_fixed_reward_real(args.D)
    for line in solved.as_lines():
        print(line)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    out = Path(args.output) if args.output else Path(settings.out_dir) / f"{args.family}.txt"
    seed = settings.seed
    if args.family == "lowerbound":
        cases = gen_lowerbound_distribution(args.M, args.R, args.D)
        directory = out.with_suffix("")
        rows = []
        for k, (instance, p) in enumerate(cases, start=1):
            name = f"instance_{k:05d}.txt"
            write_instance(instance, directory / name)
            rows.append({"k": k, "file": name, "probability": p})
        write_csv(pd.DataFrame(rows), directory / "probabilities.csv")
        return EXIT_OK
    if args.family == "worstcase":
        instance = gen_worstcase_geometric(args.M, args.R, args.D, args.c, args.truncate)
    elif args.family == "batch":
        instance = gen_batch_homogeneous(
            int(args.D), args.batch_size, args.c, args.truncate or int(args.D)
        )
    elif args.family == "poisson":
        instance = gen_random_poisson(
            args.n, args.c, args.m, args.rate, args.mu, args.sigma, seed
        )
    elif args.family == "upper-triangular":
        instance = gen_upper_triangular(args.n, args.c)
    else:
        mode = DurationMode(args.duration_mode)
        instance = gen_random_small(seed, duration_mode=mode)
    write_instance(instance, out)
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    model, runner = EXPERIMENTS[args.name]
    config = load_config(args.config or default_config_path(args.name), model)
    result = runner(config, Path(settings.out_dir), args.format)
    for path in result.files:
        print(path)
    if result.violations:
        logger.error("%s experiment reported %d violations", result.name, result.violations)
        return EXIT_VIOLATIONS
    return EXIT_OK


def cmd_check_feasibility(args: argparse.Namespace) -> int:
    if args.mode == "int":
        verdict = check_feasibility_condition_integer(
            args.R, int(args.D), args.cmin, args.eta, args.beta
        )
    else:
        verdict = check_feasibility_condition_real(
            args.R, args.D, args.cmin, args.gamma, args.eta, args.beta
        )
    print(verdict.value)
    return EXIT_OK if verdict is Verdict.FEASIBLE else EXIT_VIOLATIONS


def cmd_check_invariant(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    policy = parse_policy(args.policy, instance)
    if not isinstance(policy, FlbPolicy):
        raise ValueError("the invariant check needs an flb policy")
    R = args.R if args.R is not None else instance.r_max
    c_min = args.cmin if args.cmin is not None else instance.c_min
    D = int(instance.d_max)
    trace = run(instance, policy, CommitMode.HYPOTHETICAL)
    invariant = check_invariant_integer(instance, trace, policy.params, R, c_min)
    corollary = check_corollary_bound(instance, trace, policy.params, R, D, c_min)
    print(f"invariant: {summarize(invariant)}")
    print(f"corollary: {summarize(corollary)}")
    print(f"over_commits={len(trace.capacity_violations)}")
    return EXIT_VIOLATIONS if invariant or corollary else EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flblab", description="Forward-Looking BALANCE assignment lab"
    )
    parser.add_argument("--seed", type=int, help="Seed for generators and experiments")
    parser.add_argument("--out-dir", help="Directory for output files")
    parser.add_argument("--format", choices=["csv", "svg"], default="csv")
    parser.add_argument("--log-level", help="Logging level")
    parser.add_argument("--workers", type=int, help="Worker processes for experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Run a policy over an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--policy", required=True, help="flb[:gamma=..,eta=..,beta=..] | balance | greedy")
    p.add_argument("--mode", choices=[m.value for m in CommitMode], default="enforcing")
    p.add_argument("--trace", help="Trace CSV path (default <out-dir>/trace.csv)")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("solve-params", help="Solve a parameter program")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--D", type=float, default=1.0)
    p.add_argument("--cmin", type=_float, default=math.inf)
    p.add_argument("--mode", choices=["int", "real", "fixed-int", "fixed-real"], default="int")
    p.set_defaults(handler=cmd_solve_params)

    p = sub.add_parser("gen", help="Write a generated instance")
    p.add_argument(
        "family",
        choices=["worstcase", "lowerbound", "batch", "poisson", "upper-triangular", "random-small"],
    )
    p.add_argument("--output", help="Instance path (a directory name for lowerbound)")
    p.add_argument("--M", type=int, default=1000)
    p.add_argument("--R", type=float, default=10.0)
    p.add_argument("--D", type=float, default=10.0)
    p.add_argument("--c", type=int, default=200)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=500)
    p.add_argument("--truncate", type=int)
    p.add_argument("--batch-size", type=int, default=1000)
    p.add_argument("--rate", type=float, default=50.0)
    p.add_argument("--mu", type=float, default=2.0)
    p.add_argument("--sigma", type=float, default=3.0)
    p.add_argument(
        "--duration-mode", choices=[m.value for m in DurationMode], default="integer"
    )
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("experiment", help="Run an experiment from its config file")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--config", help="Config path (default <experiments-dir>/<name>.conf)")
    p.set_defaults(handler=cmd_experiment)

    check = sub.add_parser("check", help="Feasibility and invariant checks")
    check_sub = check.add_subparsers(dest="check", required=True)
    p = check_sub.add_parser("feasibility")
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.add_argument("--cmin", type=_float, default=math.inf)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=int, default=2)
    p.add_argument("--mode", choices=["int", "real"], default="int")
    p.set_defaults(handler=cmd_check_feasibility)
    p = check_sub.add_parser("invariant")
    p.add_argument("--instance", required=True)
    p.add_argument("--policy", default="flb")
    p.add_argument("--R", type=float, help="Reward bound assumed by the check")
    p.add_argument("--cmin", type=_float, help="Capacity assumed by the check")
    p.set_defaults(handler=cmd_check_invariant)
    return parser


def apply_overrides(args: argparse.Namespace) -> None:
    if args.seed is not None:
        settings.seed = args.seed
    if args.out_dir is not None:
        settings.out_dir = args.out_dir
    if args.log_level is not None:
        settings.log_level = args.log_level.upper()
    if args.workers is not None:
        settings.workers = max(1, args.workers)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    apply_overrides(args)
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        return args.handler(args)
    except (FlbLabError, ValueError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
