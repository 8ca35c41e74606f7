"""Mean performance ratio on Poisson-arrival instances across capacities and rates."""

import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd

from flblab.benchmarks.opt import opt_exact
from flblab.engine import run
from flblab.exceptions import CapacityViolation
from flblab.experiments.config import RandomConfig
from flblab.experiments.plotting import plot_boxes, plot_random
from flblab.experiments.runner import ExperimentResult, TrialRunner
from flblab.generators import RNG_ALGORITHM, gen_random_poisson, trial_seed
from flblab.models import INFINITY, Instance
from flblab.output import write_csv
from flblab.params import solve_flbopt_int
from flblab.policies import FlbPolicy, Policy, parse_policy

logger = logging.getLogger(__name__)

Z_95 = 1.96
TRIAL_COLUMNS = ["c", "rate", "trial", "policy", "reward", "opt", "ratio", "capacity_violation"]
SUMMARY_COLUMNS = [
    "c",
    "rate",
    "policy",
    "trials",
    "mean_ratio",
    "sd_ratio",
    "ci_low",
    "ci_high",
    "capacity_violations",
]


def random_policy(text: str, config: RandomConfig, instance: Instance) -> Policy:
    """Bare ``flb`` uses the large-capacity parameters for the configured R and D."""
    if text.strip().lower() == "flb":
        return FlbPolicy(solve_flbopt_int(config.R, int(config.D), INFINITY).flb_params())
    if text.strip().lower() == "balance":
        return parse_policy(f"balance:R={config.R},D={config.D}")
    return parse_policy(text, instance)


def run_trial(task: tuple[RandomConfig, int, int, int]) -> list[dict]:
    config, c, rate_index, trial = task
    rate = config.rates[rate_index]
    seed = trial_seed(config.resolved_seed(), c, rate_index, trial)
    instance = gen_random_poisson(config.n, c, config.m, rate, config.mu, config.sigma, seed)
    opt = opt_exact(instance)
    rows = []
    for text in config.policies:
        violation = False
        try:
            reward = run(instance, random_policy(text, config, instance)).total_reward
        except CapacityViolation as e:
            logger.warning("c=%d rate=%g trial=%d %s: %s", c, rate, trial, text, e)
            violation = True
            reward = math.nan
        rows.append(
            {
                "c": c,
                "rate": rate,
                "trial": trial,
                "policy": text,
                "reward": reward,
                "opt": opt,
                "ratio": reward / opt if opt > 0 else 1.0,
                "capacity_violation": violation,
            }
        )
    return rows


def summarize_trials(trials: pd.DataFrame) -> pd.DataFrame:
    """Mean ratio with a normal-approximation 95% interval per (c, rate, policy)."""
    rows = []
    for (c, rate, policy), group in trials.groupby(["c", "rate", "policy"], sort=False):
        ratios = group["ratio"].dropna().to_numpy()
        n = len(ratios)
        mean = float(np.mean(ratios)) if n else math.nan
        sd = float(np.std(ratios, ddof=1)) if n > 1 else 0.0
        half = Z_95 * sd / math.sqrt(n) if n else math.nan
        rows.append(
            {
                "c": c,
                "rate": rate,
                "policy": policy,
                "trials": n,
                "mean_ratio": mean,
                "sd_ratio": sd,
                "ci_low": mean - half,
                "ci_high": mean + half,
                "capacity_violations": int(group["capacity_violation"].sum()),
            }
        )
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def random_trials(config: RandomConfig) -> pd.DataFrame:
    # Workers may not share this process's settings, so tasks carry the seed.
    config = config.model_copy(update={"seed": config.resolved_seed()})
    tasks = [
        (config, c, k, trial)
        for c in config.capacities
        for k in range(len(config.rates))
        for trial in range(config.trials)
    ]
    logger.info("running %d random trials", len(tasks))
    with TrialRunner() as runner:
        results = runner.map(run_trial, tasks)
    return pd.DataFrame([row for rows in results for row in rows], columns=TRIAL_COLUMNS)


def run_random(config: RandomConfig, out_dir: Path, fmt: str = "csv") -> ExperimentResult:
    trials = random_trials(config)
    summary = summarize_trials(trials)
    note = (
        f"n={config.n} m={config.m} trials={config.trials} "
        f"seed={config.resolved_seed()} rng={RNG_ALGORITHM}"
    )
    files = [
        write_csv(summary, out_dir / "random_summary.csv", note=note),
        write_csv(trials, out_dir / "random_trials.csv", note=note),
    ]
    boxes = trials[
        [(c, r) in set(config.box_pairs) for c, r in zip(trials["c"], trials["rate"])]
    ]
    if fmt == "svg":
        files.append(plot_random(summary, out_dir / "random.svg"))
        if not boxes.empty:
            files.append(plot_boxes(boxes, out_dir / "random_boxes.svg"))
    violations = int(trials["capacity_violation"].sum())
    if violations:
        logger.warning("%d runs over-committed a server", violations)
    return ExperimentResult(name="random", rows=len(summary), violations=violations, files=files)
