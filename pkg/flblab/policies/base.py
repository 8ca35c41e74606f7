from abc import ABC, abstractmethod
from typing import Iterable, Mapping, Optional

from flblab.models import Decision, JobArrival
from flblab.timeline import AvailabilityTimeline

State = Mapping[int, AvailabilityTimeline]


class Policy(ABC):
    """Decide-on-arrival interface shared by every online policy."""

    name = "policy"

    @abstractmethod
    def decide(self, job: JobArrival, state: State) -> Decision:
        """Score the job's compatible servers and pick one or reject."""

    def label(self) -> str:
        return self.name


def pick_best(scores: Mapping[int, float], eligible: Optional[Iterable[int]] = None) -> Optional[int]:
    """Server with the largest positive score; lowest index wins ties."""
    servers = sorted(scores) if eligible is None else sorted(eligible)
    best: Optional[int] = None
    best_score = 0.0
    for server in servers:
        score = scores[server]
        if score > best_score:
            best, best_score = server, score
    return best
