"""Per-server busy-until bookkeeping and projected availability queries."""

import bisect
import logging
from typing import Iterable, Optional

from flblab.exceptions import CapacityViolation
from flblab.models import CommitMode

logger = logging.getLogger(__name__)


class AvailabilityTimeline:
    """Sorted multiset of end times of the assignments held by one server.

    A unit assigned at t with duration d is busy on [t, t + d) and free again
    at exactly t + d.
    """

    def __init__(self, capacity: int, busy_until: Iterable[float] = ()) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be at least 1, got {capacity}")
        self.capacity = int(capacity)
        self._busy: list[float] = sorted(busy_until)

    def __repr__(self) -> str:
        return f"AvailabilityTimeline(capacity={self.capacity}, busy_until={self._busy})"

    @property
    def busy_until(self) -> tuple[float, ...]:
        return tuple(self._busy)

    def busy_count(self, tau: float) -> int:
        """Number of end times strictly after tau."""
        return len(self._busy) - bisect.bisect_right(self._busy, tau)

    def projected_availability(self, tau: float) -> float:
        return 1.0 - self.busy_count(tau) / self.capacity

    def has_free_unit(self, t: float) -> bool:
        return self.busy_count(t) < self.capacity

    def breakpoints(self, start: float, end: float) -> list[float]:
        """Distinct end times inside the open window (start, end)."""
        lo = bisect.bisect_right(self._busy, start)
        hi = bisect.bisect_left(self._busy, end)
        out: list[float] = []
        for value in self._busy[lo:hi]:
            if not out or value != out[-1]:
                out.append(value)
        return out

    def release_until(self, t: float) -> None:
        """Forget end times <= t; they no longer affect queries at tau >= t."""
        cut = bisect.bisect_right(self._busy, t)
        if cut:
            del self._busy[:cut]

    def add(self, end_time: float) -> None:
        bisect.insort(self._busy, end_time)

    def copy(self) -> "AvailabilityTimeline":
        clone = AvailabilityTimeline(self.capacity)
        clone._busy = list(self._busy)
        return clone


def projected_availability(timeline: AvailabilityTimeline, tau: float) -> float:
    """alpha_{i,t->tau}: share of units not held past tau."""
    return timeline.projected_availability(tau)


def commit_assignment(
    timeline: AvailabilityTimeline,
    start: float,
    end_time: float,
    mode: CommitMode = CommitMode.ENFORCING,
    job: int = 0,
    server: int = 0,
) -> AvailabilityTimeline:
    """Occupy one unit on [start, end_time).

    Enforcing mode raises CapacityViolation when every unit is held at start;
    hypothetical mode always records the assignment.
    """
    if end_time < start:
        raise ValueError(f"end_time {end_time} precedes assignment time {start}")
    full = not timeline.has_free_unit(start)
    if full:
        if CommitMode(mode) is CommitMode.ENFORCING:
            raise CapacityViolation(job, server, start)
        logger.debug("hypothetical over-commit of job %s on server %s", job, server)
    timeline.add(end_time)
    return timeline


def min_availability(timelines: Iterable[AvailabilityTimeline], t: float) -> Optional[float]:
    values = [tl.projected_availability(t) for tl in timelines]
    return min(values) if values else None
