"""Performance ratio on the geometric worst-case family, for every truncation."""

import logging
import math
from pathlib import Path

import pandas as pd

from flblab.benchmarks.opt import opt_exact
from flblab.engine import run
from flblab.experiments.config import WorstcaseConfig
from flblab.experiments.plotting import plot_worstcase
from flblab.experiments.runner import ExperimentResult, TrialRunner
from flblab.generators import gen_worstcase_geometric
from flblab.models import INFINITY, Instance
from flblab.output import write_csv
from flblab.params import solve_flbopt_int
from flblab.policies import FlbPolicy, Policy, parse_policy

logger = logging.getLogger(__name__)

COLUMNS = ["m", "policy", "reward", "opt", "ratio"]


def worstcase_policy(text: str, config: WorstcaseConfig, instance: Instance) -> Policy:
    """Bare ``flb`` means the large-capacity integer parameters for (R, D)."""
    if text.strip().lower() == "flb":
        solved = solve_flbopt_int(config.R, int(config.D), INFINITY)
        return FlbPolicy(solved.flb_params())
    return parse_policy(text, instance)


def _prefix_rewards(task: tuple[WorstcaseConfig, str]) -> tuple[str, list[float]]:
    config, text = task
    instance = gen_worstcase_geometric(config.M, config.R, config.D, config.c)
    policy = worstcase_policy(text, config, instance)
    # Decisions never look ahead, so one run gives the reward of every truncation.
    trace = run(instance, policy)
    logger.info("%s collected %.6g on the full instance", policy.label(), trace.total_reward)
    return text, trace.cumulative_rewards()


def worstcase_frame(config: WorstcaseConfig) -> pd.DataFrame:
    instance = gen_worstcase_geometric(config.M, config.R, config.D, config.c)
    opts = [opt_exact(instance.truncated(m)) for m in range(1, config.M + 1)]
    with TrialRunner() as runner:
        runs = runner.map(_prefix_rewards, [(config, p) for p in config.policies])
    rows = []
    for name, rewards in runs:
        for m, (reward, opt) in enumerate(zip(rewards, opts), start=1):
            rows.append(
                {"m": m, "policy": name, "reward": reward, "opt": opt, "ratio": reward / opt}
            )
    return pd.DataFrame(rows, columns=COLUMNS)


def run_worstcase(config: WorstcaseConfig, out_dir: Path, fmt: str = "csv") -> ExperimentResult:
    frame = worstcase_frame(config)
    reference = 1.0 / math.log(config.R * config.D)
    note = f"M={config.M} R={config.R} D={config.D} c={config.c}"
    files = [write_csv(frame, out_dir / "worstcase.csv", note=note)]
    if fmt == "svg":
        files.append(plot_worstcase(frame, reference, out_dir / "worstcase.svg"))
    for label, group in frame.groupby("policy", sort=False):
        logger.info(
            "%s: min ratio %.4f, ratio at m=%d %.4f",
            label,
            group["ratio"].min(),
            config.M,
            group["ratio"].iloc[-1],
        )
    return ExperimentResult(name="worstcase", rows=len(frame), files=files)
