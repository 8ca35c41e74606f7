"""Certificate suite: built-in rows plus random small instances in both duration modes."""

import logging
from pathlib import Path

import pandas as pd

from flblab.benchmarks.certificates import construct_dual, verify_certificate
from flblab.engine import run
from flblab.experiments.config import CertificateConfig
from flblab.experiments.runner import ExperimentResult, TrialRunner
from flblab.generators import RNG_ALGORITHM, gen_random_small, trial_seed
from flblab.models import CertificateReport, DurationMode, FlbParams, Instance, JobArrival
from flblab.output import write_csv
from flblab.params import solve_flbopt_int, solve_for_instance
from flblab.policies import FlbPolicy

logger = logging.getLogger(__name__)

COLUMNS = [
    "instance_id",
    "mode",
    "alg_reward",
    "opt",
    "dual_objective",
    "ratio_bound",
    "max_step_ratio",
    "worst_config_slack",
    "configurations_checked",
    "violations",
]


def _unit_job(index: int, t: float, reward: float, duration: float) -> JobArrival:
    return JobArrival(
        index=index, arrival_time=t, compat=(1,), reward={1: reward}, duration={1: duration}
    )


def builtin_cases() -> list[tuple[str, Instance, FlbParams]]:
    """Single job at the homogeneous parameters, an empty instance and an overlapping pair."""
    homogeneous = solve_flbopt_int(1.0, 1).flb_params()
    single = Instance(servers=(1,), jobs=(_unit_job(1, 0.0, 1.0, 1.0),))
    empty = Instance(servers=(1,))
    pair = Instance.from_jobs(
        [1], [_unit_job(1, 0.0, 1.0, 1.0), _unit_job(2, 0.5, 3.0, 1.0)]
    )
    return [
        ("single-job", single, homogeneous),
        ("empty", empty, homogeneous),
        ("overlap-pair", pair, solve_for_instance(pair).flb_params()),
    ]


def certify(instance_id: str, instance: Instance, params: FlbParams) -> CertificateReport:
    trace = run(instance, FlbPolicy(params))
    dual = construct_dual(trace, params, instance)
    return verify_certificate(
        dual, trace, instance, params, instance.duration_mode, instance_id=instance_id
    )


def _random_case(task: tuple[CertificateConfig, DurationMode, int]) -> tuple[str, CertificateReport]:
    config, mode, trial = task
    instance = gen_random_small(
        trial_seed(config.resolved_seed(), list(DurationMode).index(mode), trial),
        max_jobs=config.max_jobs,
        max_servers=config.max_servers,
        max_capacity=config.max_capacity,
        min_capacity=config.min_capacity,
        R=config.R,
        D=config.D,
        duration_mode=mode,
    )
    params = solve_for_instance(instance).flb_params()
    return mode.value, certify(f"random-{mode.value}-{trial}", instance, params)


def report_row(mode: str, report: CertificateReport) -> dict:
    return {
        "instance_id": report.instance_id,
        "mode": mode,
        "alg_reward": report.alg_reward,
        "opt": report.opt,
        "dual_objective": report.dual_objective,
        "ratio_bound": report.ratio_bound,
        "max_step_ratio": report.max_step_ratio,
        "worst_config_slack": report.worst_config_slack,
        "configurations_checked": report.configurations_checked,
        "violations": report.violation_count,
    }


def certificate_frame(config: CertificateConfig) -> pd.DataFrame:
    rows = [
        report_row(instance.duration_mode.value, certify(name, instance, params))
        for name, instance, params in builtin_cases()
    ]
    config = config.model_copy(update={"seed": config.resolved_seed()})
    tasks = [(config, mode, trial) for mode in config.modes for trial in range(config.trials)]
    with TrialRunner() as runner:
        rows.extend(report_row(mode, report) for mode, report in runner.map(_random_case, tasks))
    return pd.DataFrame(rows, columns=COLUMNS)


def run_certificates(
    config: CertificateConfig, out_dir: Path, fmt: str = "csv"
) -> ExperimentResult:
    frame = certificate_frame(config)
    note = f"seed={config.resolved_seed()} rng={RNG_ALGORITHM}"
    files = [write_csv(frame, out_dir / "certificates.csv", note=note)]
    violations = int(frame["violations"].sum())
    worst = (frame["alg_reward"] / frame["opt"]).where(frame["opt"] > 0).min()
    logger.info(
        "%d certificates, %d violations, worst alg/opt %.4f", len(frame), violations, worst
    )
    if fmt == "svg":
        logger.info("certificates produce no chart; CSV only")
    return ExperimentResult(
        name="certificates", rows=len(frame), violations=violations, files=files
    )
