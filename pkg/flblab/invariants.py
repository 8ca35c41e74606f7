"""Capacity-feasibility conditions and the projected-availability invariant.

The integer-duration condition compares ln(beta) with
-ln(rho(R/(R+eta), D) - (R+eta) ln(beta) / (R c_min)); the real-duration one
adds the correction terms for inspecting every 1/gamma. Both report
``undefined`` when a logarithm's argument is not positive.
"""

import logging
import math
from enum import Enum
from typing import Iterable, Optional, Sequence

from flblab.config import settings
from flblab.exceptions import PreconditionViolated
from flblab.models import (
    CommitMode,
    DurationMode,
    FlbParams,
    Instance,
    InvariantViolation,
    Trace,
)
from flblab.special import log_rho_product, rho_product
from flblab.timeline import AvailabilityTimeline, commit_assignment

logger = logging.getLogger(__name__)

_CEIL_TOL = 1e-9

Triple = tuple[int, float, float, int]


class Verdict(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNDEFINED = "undefined"


def _as_int(value: float, name: str) -> int:
    if value != int(value) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def _check_knobs(eta: float, beta: float) -> None:
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta!r}")
    if beta <= 1:
        raise ValueError(f"beta must exceed 1, got {beta!r}")


def capacity_term(
    R: float, eta: float, log_beta: float, c_min: float, gamma: int = 1
) -> float:
    """(gamma * eta + R) ln(beta) / (R c_min); vanishes as c_min -> inf."""
    if math.isinf(c_min):
        return 0.0
    return (gamma * eta + R) * log_beta / (R * c_min)


def integer_condition_rhs(
    R: float, d: int, c_min: float, eta: float, log_beta: float
) -> Optional[float]:
    """-ln(rho(R/(R+eta), d) - eps), or None when the argument is not positive."""
    arg = rho_product(R / (R + eta), d) - capacity_term(R, eta, log_beta, c_min)
    if arg <= 0:
        return None
    return -math.log(arg)


def check_feasibility_condition_integer(
    R: float, D: int, c_min: float, eta: float, beta: float
) -> Verdict:
    _check_knobs(eta, beta)
    D = _as_int(D, "D")
    log_beta = math.log(beta)
    rhs = integer_condition_rhs(R, D, c_min, eta, log_beta)
    if rhs is None:
        return Verdict.UNDEFINED
    slack = settings.feasibility_tol * max(1.0, abs(rhs))
    return Verdict.FEASIBLE if log_beta >= rhs - slack else Verdict.INFEASIBLE


def real_condition_rhs(
    R: float, D: float, c_min: float, gamma: int, eta: float, log_beta: float
) -> Optional[float]:
    """Right-hand side of the real-duration condition, or None if undefined."""
    z = R / (R + gamma * eta)
    eps = capacity_term(R, eta, log_beta, c_min, gamma)
    ratio = R / eta
    x = eta / (R + gamma * eta)
    # (gamma + R/eta)(1 - eps) - (R/eta)(1 + x)^gamma, rearranged around expm1.
    inner = (
        1.0
        + gamma * (1.0 - eps)
        - ratio * eps
        - ratio * math.expm1(gamma * math.log1p(x))
    )
    if inner <= 0:
        return None
    k_long = max(1, math.ceil(gamma * D - _CEIL_TOL))
    return (
        -log_rho_product(z, k_long)
        - math.log(inner)
        + math.log((gamma + 1) * (R + gamma * eta) / (gamma * eta))
        + log_rho_product(z, gamma + 1)
    )


def check_feasibility_condition_real(
    R: float, D: float, c_min: float, gamma: int, eta: float, beta: float
) -> Verdict:
    _check_knobs(eta, beta)
    gamma = _as_int(gamma, "gamma")
    log_beta = math.log(beta)
    rhs = real_condition_rhs(R, D, c_min, gamma, eta, log_beta)
    if rhs is None:
        return Verdict.UNDEFINED
    slack = settings.feasibility_tol * max(1.0, abs(rhs))
    return Verdict.FEASIBLE if log_beta >= rhs - slack else Verdict.INFEASIBLE


def corollary_lower_bound(
    R: float, D: int, c_min: float, eta: float, beta: float
) -> Optional[float]:
    """Lower bound on alpha_{i,t_j->t_j} along any hypothetical FLB run."""
    log_beta = math.log(beta)
    rhs = integer_condition_rhs(R, _as_int(D, "D"), c_min, eta, log_beta)
    if rhs is None:
        return None
    return 1.0 - rhs / log_beta


def invariant_grid(instance: Instance, D: Optional[int] = None) -> list[Triple]:
    """(server, t, tau, d) for every arrival time, tau - t in 1..D and d in 1..D."""
    D = _as_int(D if D is not None else instance.d_max, "D")
    times = sorted({job.arrival_time for job in instance.jobs})
    return [
        (server, t, t + k, d)
        for t in times
        for server in instance.server_ids()
        for k in range(1, D + 1)
        for d in range(1, D + 1)
    ]


def _replay(instance: Instance, trace: Trace) -> list[tuple[float, int, int]]:
    """(arrival time, job, server) of every assignment, in index order."""
    by_index = {job.index: job for job in instance.jobs}
    out = []
    for job_index, server in sorted(trace.assignments().items()):
        job = by_index[job_index]
        if server not in job.compat:
            raise ValueError(f"trace assigns job {job_index} to incompatible server {server}")
        out.append((job.arrival_time, job_index, server))
    return out


def _check_integer_preconditions(instance: Instance, params: FlbParams) -> None:
    if instance.duration_mode is not DurationMode.INTEGER:
        raise ValueError("the integer invariant needs integer durations")
    if params.gamma != 1:
        raise ValueError(f"the integer invariant needs gamma = 1, got {params.gamma}")


def check_invariant_integer(
    instance: Instance,
    trace: Trace,
    params: FlbParams,
    R: float,
    c_min: float,
    triples: Optional[Iterable[Triple]] = None,
) -> list[InvariantViolation]:
    """Evaluate (alpha(tau+d) - alpha(tau)) ln(beta) <= -ln(rho_d - eps) on triples.

    The state at t holds every assignment of a job arriving at or before t,
    replayed without capacity checks.
    """
    _check_integer_preconditions(instance, params)
    triples = sorted(
        invariant_grid(instance) if triples is None else triples,
        key=lambda triple: triple[1],
    )
    log_beta = params.log_beta
    rhs_by_d: dict[int, float] = {}
    for _, _, _, d in triples:
        if d in rhs_by_d:
            continue
        rhs = integer_condition_rhs(R, d, c_min, params.eta, log_beta)
        if rhs is None:
            raise PreconditionViolated(
                f"rho({R}/(R+eta), {d}) does not exceed the capacity term at c_min={c_min}"
            )
        rhs_by_d[d] = rhs

    timelines = {s: AvailabilityTimeline(instance.capacity(s)) for s in instance.server_ids()}
    assignments = _replay(instance, trace)
    cursor = 0
    tol = settings.violation_tol
    violations: list[InvariantViolation] = []
    for server, t, tau, d in triples:
        while cursor < len(assignments) and assignments[cursor][0] <= t:
            start, job_index, target = assignments[cursor]
            job = instance.jobs[job_index - 1]
            commit_assignment(
                timelines[target],
                start,
                job.end_time(target),
                CommitMode.HYPOTHETICAL,
                job_index,
                target,
            )
            cursor += 1
        timeline = timelines[server]
        lhs = (
            timeline.projected_availability(tau + d) - timeline.projected_availability(tau)
        ) * log_beta
        rhs = rhs_by_d[d]
        if lhs > rhs + tol * max(1.0, abs(rhs)):
            violations.append(
                InvariantViolation(
                    kind="invariant", server=server, t=t, tau=tau, d=d, lhs=lhs, rhs=rhs
                )
            )
    if violations:
        logger.warning("invariant violated at %d of %d triples", len(violations), len(triples))
    return violations


def check_corollary_bound(
    instance: Instance,
    trace: Trace,
    params: FlbParams,
    R: float,
    D: int,
    c_min: float,
) -> list[InvariantViolation]:
    """alpha_{i,t_j->t_j} after each decision against the corollary's lower bound."""
    _check_integer_preconditions(instance, params)
    bound = corollary_lower_bound(R, D, c_min, params.eta, params.beta)
    if bound is None:
        raise PreconditionViolated("corollary bound undefined for these parameters")
    assignments = trace.assignments()
    timelines = {s: AvailabilityTimeline(instance.capacity(s)) for s in instance.server_ids()}
    tol = settings.violation_tol
    violations: list[InvariantViolation] = []
    for job in instance.jobs:
        server = assignments.get(job.index)
        if server is not None:
            commit_assignment(
                timelines[server],
                job.arrival_time,
                job.end_time(server),
                CommitMode.HYPOTHETICAL,
                job.index,
                server,
            )
        for i, timeline in timelines.items():
            alpha = timeline.projected_availability(job.arrival_time)
            if alpha < bound - tol:
                violations.append(
                    InvariantViolation(
                        kind="corollary", server=i, t=job.arrival_time, lhs=alpha, rhs=bound
                    )
                )
    return violations


def summarize(violations: Sequence[InvariantViolation]) -> str:
    if not violations:
        return "no violations"
    worst = max(violations, key=lambda v: abs(v.lhs - v.rhs))
    return f"{len(violations)} violations, worst at server {worst.server} t={worst.t}"
