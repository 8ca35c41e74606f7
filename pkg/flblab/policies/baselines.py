"""Classic BALANCE and GREEDY."""

import logging
import math

from flblab.models import Decision, FlbParams, JobArrival, ServerView
from flblab.policies.base import Policy, State, pick_best
from flblab.policies.flb import penalty

logger = logging.getLogger(__name__)


def balance_penalty_params(r_max: float, d_max: float) -> FlbParams:
    """Psi_B(x) = (RD / (e - 1)) * (e^(1 - x) - 1) as FLB parameters."""
    return FlbParams(gamma=1, eta=r_max * d_max / (math.e - 1.0), beta=math.e)


class BalancePolicy(Policy):
    """Score r*d - Psi_B(current availability); needs a free unit to assign."""

    name = "balance"

    def __init__(self, r_max: float, d_max: float) -> None:
        self.r_max = r_max
        self.d_max = d_max
        self.params = balance_penalty_params(r_max, d_max)

    def label(self) -> str:
        return f"balance:R={self.r_max!r},D={self.d_max!r}"

    def decide(self, job: JobArrival, state: State) -> Decision:
        t = job.arrival_time
        scores: dict[int, float] = {}
        views: dict[int, ServerView] = {}
        free: list[int] = []
        for server in sorted(job.compat):
            timeline = state[server]
            alpha = timeline.projected_availability(t)
            views[server] = ServerView(times=(t,), availabilities=(alpha,), weights=(1.0,))
            scores[server] = job.value(server) - penalty(self.params, alpha)
            if timeline.has_free_unit(t):
                free.append(server)
        return Decision(chosen=pick_best(scores, free), scores=scores, views=views)


class GreedyPolicy(Policy):
    """Largest r*d among compatible servers that have a free unit."""

    name = "greedy"

    def decide(self, job: JobArrival, state: State) -> Decision:
        t = job.arrival_time
        scores: dict[int, float] = {}
        views: dict[int, ServerView] = {}
        for server in sorted(job.compat):
            timeline = state[server]
            views[server] = ServerView(
                times=(t,),
                availabilities=(timeline.projected_availability(t),),
                weights=(0.0,),
            )
            if timeline.has_free_unit(t):
                scores[server] = job.value(server)
        return Decision(chosen=pick_best(scores), scores=scores, views=views)
