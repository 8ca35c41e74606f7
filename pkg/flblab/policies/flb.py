"""Forward-Looking BALANCE.

Each compatible server is scored by its reduced reward: the job's total
reward minus the penalty Psi evaluated at the server's projected
availability over the job's occupancy window. Discrete inspection samples
the window every 1/gamma; gamma = inf integrates Psi over it exactly.
"""

import logging
import math

from flblab.models import Decision, FlbParams, JobArrival, ServerView
from flblab.policies.base import Policy, State, pick_best
from flblab.timeline import AvailabilityTimeline

logger = logging.getLogger(__name__)

# Absorbs float noise in gamma * d when it should be an integer.
_CEIL_TOL = 1e-9


def penalty(params: FlbParams, x: float) -> float:
    """Psi(x) = eta * (beta^(1 - x) - 1); zero at x = 1, convex and decreasing."""
    return params.eta * math.expm1((1.0 - x) * math.log(params.beta))


def inspection_count(d: float, gamma: int) -> int:
    return max(1, math.ceil(gamma * d - _CEIL_TOL))


def inspection_times(t: float, d: float, gamma: int) -> list[float]:
    """Times t + l/gamma that fall inside [t, t + d)."""
    if d <= 0:
        raise ValueError(f"duration must be positive, got {d}")
    if math.isinf(gamma) or gamma < 1 or gamma != int(gamma):
        raise ValueError(f"gamma must be a positive integer, got {gamma!r}")
    gamma = int(gamma)
    return [t + l / gamma for l in range(inspection_count(d, gamma))]


def discrete_view(
    params: FlbParams, d: float, timeline: AvailabilityTimeline, t: float
) -> ServerView:
    times = inspection_times(t, d, params.gamma)
    return ServerView(
        times=tuple(times),
        availabilities=tuple(timeline.projected_availability(tau) for tau in times),
        weights=(1.0,) * len(times),
    )


def continuous_view(d: float, timeline: AvailabilityTimeline, t: float) -> ServerView:
    """Constant pieces of alpha_{t->tau} over [t, t + d)."""
    end = t + d
    starts = [t, *timeline.breakpoints(t, end)]
    stops = [*starts[1:], end]
    return ServerView(
        times=tuple(starts),
        availabilities=tuple(timeline.projected_availability(s) for s in starts),
        weights=tuple(b - a for a, b in zip(starts, stops)),
    )


def view_penalty(params: FlbParams, view: ServerView) -> float:
    return math.fsum(
        w * penalty(params, a) for a, w in zip(view.availabilities, view.weights)
    )


def server_view(
    params: FlbParams, d: float, timeline: AvailabilityTimeline, t: float
) -> ServerView:
    if params.continuous:
        return continuous_view(d, timeline, t)
    return discrete_view(params, d, timeline, t)


def reduced_reward_discrete(
    params: FlbParams, r: float, d: float, timeline: AvailabilityTimeline, t: float
) -> float:
    if params.continuous:
        raise ValueError("discrete reduced reward needs a finite gamma")
    return r * d - view_penalty(params, discrete_view(params, d, timeline, t))


def reduced_reward_continuous(
    params: FlbParams, r: float, d: float, timeline: AvailabilityTimeline, t: float
) -> float:
    if not params.continuous:
        raise ValueError("continuous reduced reward needs gamma = inf")
    return r * d - view_penalty(params, continuous_view(d, timeline, t))


class FlbPolicy(Policy):
    """Assign to the compatible server with the largest positive reduced reward.

    Free capacity is never checked here; with feasible parameters the scores
    alone keep every server within capacity.
    """

    name = "flb"

    def __init__(self, params: FlbParams) -> None:
        self.params = params

    def label(self) -> str:
        return self.params.label()

    def decide(self, job: JobArrival, state: State) -> Decision:
        scores: dict[int, float] = {}
        views: dict[int, ServerView] = {}
        for server in sorted(job.compat):
            d = job.duration[server]
            view = server_view(self.params, d, state[server], job.arrival_time)
            views[server] = view
            scores[server] = job.value(server) - view_penalty(self.params, view)
        chosen = pick_best(scores)
        logger.debug("flb job %s -> %s scores=%s", job.index, chosen, scores)
        return Decision(chosen=chosen, scores=scores, views=views)
