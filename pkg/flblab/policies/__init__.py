"""Online assignment policies behind a single decide-on-arrival interface.

Policies are selected by strings such as ``flb:gamma=1,eta=0.58198,beta=2.71828``,
``flb:gamma=inf,eta=3,beta=2.71828``, ``flb`` (solver-chosen parameters),
``balance`` and ``greedy``.
"""

import logging
import math
from typing import Optional

from flblab.models import Decision, FlbParams, Instance, JobArrival
from flblab.params import solve_for_instance
from flblab.policies.base import Policy, State, pick_best
from flblab.policies.baselines import BalancePolicy, GreedyPolicy, balance_penalty_params
from flblab.policies.flb import (
    FlbPolicy,
    inspection_times,
    penalty,
    reduced_reward_continuous,
    reduced_reward_discrete,
    server_view,
)

logger = logging.getLogger(__name__)


def decide(policy: Policy, job: JobArrival, state: State) -> Decision:
    """Run one policy decision; jobs with no compatible server are rejected."""
    if not job.compat:
        return Decision()
    return policy.decide(job, state)


def _parse_options(text: str) -> dict[str, str]:
    options: dict[str, str] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {part!r}")
        options[key.strip()] = value.strip()
    return options


def _parse_float(value: str) -> float:
    if value.lower() in ("inf", "infinity"):
        return math.inf
    return float(value)


def parse_policy(text: str, instance: Optional[Instance] = None) -> Policy:
    """Build a policy from its CLI string.

    BALANCE reads R and D from the options or from the instance; bare ``flb``
    solves parameters for the instance.
    """
    kind, _, rest = text.strip().partition(":")
    kind = kind.lower()
    try:
        options = _parse_options(rest)
        if kind == "greedy":
            return GreedyPolicy()
        if kind == "balance":
            if "R" in options and "D" in options:
                return BalancePolicy(float(options["R"]), float(options["D"]))
            if instance is None:
                raise ValueError("balance needs R and D or an instance")
            return BalancePolicy(instance.r_max, instance.d_max)
        if kind == "flb":
            if not options:
                if instance is None:
                    raise ValueError("bare flb needs an instance to solve parameters for")
                return FlbPolicy(solve_for_instance(instance).flb_params())
            params = FlbParams(
                gamma=_parse_float(options.get("gamma", "1")),
                eta=_parse_float(options["eta"]),
                beta=_parse_float(options["beta"]),
            )
            return FlbPolicy(params)
    except KeyError as e:
        raise ValueError(f"policy {text!r} is missing option {e.args[0]}") from e
    raise ValueError(f"unknown policy {text!r}")


__all__ = [
    "BalancePolicy",
    "Decision",
    "FlbPolicy",
    "GreedyPolicy",
    "Policy",
    "balance_penalty_params",
    "decide",
    "inspection_times",
    "parse_policy",
    "penalty",
    "pick_best",
    "reduced_reward_continuous",
    "reduced_reward_discrete",
    "server_view",
]
