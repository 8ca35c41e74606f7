"""Arrival-by-arrival simulation of a policy over an instance."""

import logging
import math
from pathlib import Path
from typing import Union

import pandas as pd

from flblab.exceptions import CapacityViolation
from flblab.models import CommitMode, Instance, Trace, TraceDecision
from flblab.output import write_csv
from flblab.policies import Policy, decide
from flblab.timeline import AvailabilityTimeline, commit_assignment

logger = logging.getLogger(__name__)

TRACE_COLUMNS = [
    "job",
    "t",
    "server_or_reject",
    "score_chosen",
    "reward_collected",
    "min_availability_after",
]


def initial_state(instance: Instance) -> dict[int, AvailabilityTimeline]:
    return {s: AvailabilityTimeline(instance.capacity(s)) for s in instance.server_ids()}


def run(
    instance: Instance, policy: Policy, mode: CommitMode = CommitMode.ENFORCING
) -> Trace:
    """Process jobs in index order and record every decision.

    Enforcing mode propagates CapacityViolation; hypothetical mode commits
    anyway and lists the over-commits in the trace.
    """
    mode = CommitMode(mode)
    state = initial_state(instance)
    decisions: list[TraceDecision] = []
    over_commits: list[tuple[int, int]] = []
    for job in instance.jobs:
        t = job.arrival_time
        for timeline in state.values():
            timeline.release_until(t)
        decision = decide(policy, job, state)
        reward = 0.0
        if decision.chosen is not None:
            server = decision.chosen
            timeline = state[server]
            if mode is CommitMode.HYPOTHETICAL and not timeline.has_free_unit(t):
                over_commits.append((job.index, server))
            try:
                commit_assignment(
                    timeline, t, job.end_time(server), mode, job.index, server
                )
            except CapacityViolation:
                logger.error(
                    "%s over-committed server %s with job %s",
                    policy.label(),
                    server,
                    job.index,
                )
                raise
            reward = job.value(server)
        decisions.append(
            TraceDecision(
                job=job.index,
                arrival_time=t,
                chosen=decision.chosen,
                scores=decision.scores,
                views=decision.views,
                reward=reward,
                min_availability_after=min(
                    tl.projected_availability(t) for tl in state.values()
                ),
            )
        )
    total = math.fsum(d.reward for d in decisions)
    logger.debug("%s collected %.6g over %d jobs", policy.label(), total, len(decisions))
    return Trace(
        policy=policy.label(),
        mode=mode,
        decisions=decisions,
        total_reward=total,
        capacity_violations=over_commits,
    )


def trace_frame(trace: Trace) -> pd.DataFrame:
    rows = [
        {
            "job": d.job,
            "t": d.arrival_time,
            "server_or_reject": "reject" if d.chosen is None else str(d.chosen),
            "score_chosen": d.score_chosen,
            "reward_collected": d.reward,
            "min_availability_after": d.min_availability_after,
        }
        for d in trace.decisions
    ]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def write_trace_csv(trace: Trace, path: Union[Path, str]) -> Path:
    return write_csv(trace_frame(trace), path, note=f"policy={trace.policy}")
