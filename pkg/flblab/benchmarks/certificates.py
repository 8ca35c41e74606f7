"""Primal-dual certificates for FLB runs.

``construct_dual`` replays a trace and builds (lambda, theta) with the
assignment-time updates; ``verify_certificate`` checks the per-step increment
bound, dual feasibility on every enumerated configuration, weak duality
against the exact optimum and the competitive ratio it implies.
"""

import logging
import math
from typing import Optional, Union

from flblab.benchmarks.configurations import enumerate_configurations
from flblab.benchmarks.opt import opt_exact
from flblab.config import settings
from flblab.exceptions import NegativeAvailability, TooLarge
from flblab.models import (
    CertificateReport,
    DualSolution,
    DurationMode,
    FlbParams,
    Instance,
    Trace,
)
from flblab.params import capacity_kappa, ratio_bound_int, ratio_bound_real
from flblab.policies.flb import inspection_times, penalty
from flblab.timeline import AvailabilityTimeline, commit_assignment

logger = logging.getLogger(__name__)


def _step_increments(
    trace: Trace, params: FlbParams, instance: Instance
) -> list[tuple[int, int, float, float, float, int]]:
    """(job, server, reward, lambda, theta increment, inspections) per assignment."""
    if params.continuous:
        raise ValueError("dual construction needs a finite gamma")
    timelines = {s: AvailabilityTimeline(instance.capacity(s)) for s in instance.server_ids()}
    steps = []
    for decision in trace.decisions:
        server = decision.chosen
        if server is None:
            continue
        job = instance.jobs[decision.job - 1]
        timeline = timelines[server]
        t = job.arrival_time
        if not timeline.has_free_unit(t):
            raise NegativeAvailability(job.index, server, timeline.projected_availability(t))
        shift = 1.0 / timeline.capacity
        alphas = [
            timeline.projected_availability(tau)
            for tau in inspection_times(t, job.duration[server], params.gamma)
        ]
        lam = job.value(server) - math.fsum(penalty(params, a) for a in alphas)
        dtheta = math.fsum(penalty(params, a - shift) - penalty(params, a) for a in alphas)
        steps.append((job.index, server, job.value(server), lam, dtheta, len(alphas)))
        commit_assignment(timeline, t, job.end_time(server), job=job.index, server=server)
    return steps


def construct_dual(trace: Trace, params: FlbParams, instance: Instance) -> DualSolution:
    lam: dict[int, float] = {job.index: 0.0 for job in instance.jobs}
    theta: dict[int, float] = {s: 0.0 for s in instance.server_ids()}
    for job, server, _, value, dtheta, _ in _step_increments(trace, params, instance):
        lam[job] = value
        theta[server] += dtheta
    objective = math.fsum(lam.values()) + math.fsum(
        instance.capacity(s) * theta[s] for s in theta
    )
    return DualSolution(lambda_=lam, theta=theta, objective=objective)


def certified_ratio(params: FlbParams, c_min: float, mode: DurationMode) -> float:
    if DurationMode(mode) is DurationMode.REAL and params.gamma >= 2:
        return ratio_bound_real(params.gamma, params.eta, params.beta, c_min)
    return ratio_bound_int(params.eta, params.beta, c_min)


def feasibility_slack(params: FlbParams, mode: DurationMode) -> float:
    """gamma/(gamma-1) for real durations inspected every 1/gamma, else 1."""
    if DurationMode(mode) is DurationMode.REAL and params.gamma >= 2:
        return params.gamma / (params.gamma - 1)
    return 1.0


def verify_certificate(
    dual: DualSolution,
    trace: Trace,
    instance: Instance,
    params: FlbParams,
    gamma_mode: Union[DurationMode, str] = DurationMode.INTEGER,
    instance_id: str = "",
    opt: Optional[float] = None,
) -> CertificateReport:
    mode = DurationMode(gamma_mode)
    tol = settings.violation_tol
    c_min = instance.c_min
    gamma_bound = certified_ratio(params, c_min, mode)
    slack = feasibility_slack(params, mode)
    kappa = capacity_kappa(params.beta, c_min)

    # Per-step increments
    step_violations = 0
    max_step_ratio = 0.0
    for job, server, reward, value, dtheta, inspections in _step_increments(
        trace, params, instance
    ):
        increment = value + instance.capacity(server) * dtheta
        if mode is DurationMode.INTEGER:
            allowance = gamma_bound * reward
        else:
            allowance = params.log_beta * (reward + inspections * params.eta * kappa)
        max_step_ratio = max(max_step_ratio, increment / reward)
        if increment > allowance + tol * max(1.0, allowance):
            step_violations += 1
            logger.warning(
                "job %d on server %d: dual step %.6g exceeds %.6g", job, server, increment, allowance
            )

    # Dual feasibility on configurations
    values = {job.index: job for job in instance.jobs}
    worst_slack = math.inf
    config_violations = 0
    checked = 0
    try:
        for server in instance.server_ids():
            theta = dual.theta.get(server, 0.0)
            for config in enumerate_configurations(instance, server):
                lhs = slack * (math.fsum(dual.lambda_.get(j, 0.0) for j in config.jobs) + theta)
                rhs = math.fsum(values[j].value(server) for j in config.jobs)
                gap = lhs - rhs
                worst_slack = min(worst_slack, gap)
                checked += 1
                if gap < -tol * max(1.0, rhs):
                    config_violations += 1
    except TooLarge as e:
        logger.warning("skipping configuration check for %s: %s", instance_id or "instance", e)
    if checked == 0:
        worst_slack = 0.0

    # Weak duality and the implied ratio
    if opt is None:
        try:
            opt = opt_exact(instance)
        except TooLarge as e:
            logger.warning("no exact optimum for %s: %s", instance_id or "instance", e)
            opt = math.nan
    weak_ok = competitive_ok = True
    if not math.isnan(opt):
        weak_ok = slack * dual.objective >= opt - tol * max(1.0, opt)
        competitive_ok = trace.total_reward >= opt / gamma_bound - tol * max(1.0, opt)

    return CertificateReport(
        instance_id=instance_id,
        alg_reward=trace.total_reward,
        opt=opt,
        dual_objective=dual.objective,
        ratio_bound=gamma_bound,
        max_step_ratio=max_step_ratio,
        worst_config_slack=worst_slack,
        step_violations=step_violations,
        config_violations=config_violations,
        configurations_checked=checked,
        weak_duality_ok=weak_ok,
        competitive_ok=competitive_ok,
    )
