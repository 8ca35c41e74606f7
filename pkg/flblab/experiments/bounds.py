"""Certified ratio bounds over an (R, D) grid and the constants they imply.

For each solver the excess ratio_bound - ln(RD) - k ln ln(R v D) is tabulated,
with k = 1 for the integer program and k = 3 for the real one; its maximum is
the fitted constant.
"""

import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd

from flblab.experiments.config import BoundsConfig
from flblab.experiments.runner import ExperimentResult, TrialRunner
from flblab.models import INFINITY
from flblab.output import write_csv
from flblab.params import solve_flbopt_int, solve_flbopt_real

logger = logging.getLogger(__name__)

LOGLOG_WEIGHT = {"int": 1.0, "real": 3.0}
COLUMNS = ["solver", "R", "D", "gamma", "eta", "beta", "ratio_bound", "excess"]


def loglog(R: float, D: float) -> float:
    """ln ln(R v D), evaluated at e when R v D < e so it stays finite."""
    return math.log(math.log(max(R, D, math.e)))


def bound_excess(solver: str, R: float, D: float, ratio_bound: float) -> float:
    return ratio_bound - math.log(R * D) - LOGLOG_WEIGHT[solver] * loglog(R, D)


def grid(config: BoundsConfig, solver: str) -> list[tuple[float, float]]:
    values = np.geomspace(config.low, config.high, config.points)
    durations = values
    if solver == "int":
        durations = np.unique(np.round(values))
    return [(float(R), float(D)) for R in values for D in durations]


def _solve_point(task: tuple[str, float, float]) -> dict:
    solver, R, D = task
    if solver == "int":
        solved = solve_flbopt_int(R, int(D), INFINITY)
    else:
        solved = solve_flbopt_real(R, D, INFINITY)
    return {
        "solver": solver,
        "R": R,
        "D": D,
        "gamma": solved.gamma,
        "eta": solved.eta,
        "beta": solved.beta,
        "ratio_bound": solved.ratio_bound,
        "excess": bound_excess(solver, R, D, solved.ratio_bound),
    }


def bounds_frame(config: BoundsConfig) -> pd.DataFrame:
    unknown = set(config.solvers) - set(LOGLOG_WEIGHT)
    if unknown:
        raise ValueError(f"unknown solvers {sorted(unknown)}")
    tasks = [(solver, R, D) for solver in config.solvers for R, D in grid(config, solver)]
    with TrialRunner() as runner:
        rows = runner.map(_solve_point, tasks)
    return pd.DataFrame(rows, columns=COLUMNS)


def fitted_constants(frame: pd.DataFrame) -> dict[str, float]:
    return {solver: float(g["excess"].max()) for solver, g in frame.groupby("solver", sort=False)}


def run_bounds(config: BoundsConfig, out_dir: Path, fmt: str = "csv") -> ExperimentResult:
    frame = bounds_frame(config)
    constants = fitted_constants(frame)
    summary = pd.DataFrame(
        [{"solver": s, "fitted_constant": c} for s, c in constants.items()],
        columns=["solver", "fitted_constant"],
    )
    files = [
        write_csv(frame, out_dir / "bounds.csv"),
        write_csv(summary, out_dir / "bounds_summary.csv"),
    ]
    for solver, constant in constants.items():
        logger.info("%s solver: fitted constant %.4f", solver, constant)
    return ExperimentResult(name="bounds", rows=len(frame), files=files)
