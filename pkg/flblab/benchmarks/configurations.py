import logging

from flblab.exceptions import TooLarge
from flblab.models import Configuration, Instance

logger = logging.getLogger(__name__)

ENUMERATION_LIMIT = 20


def enumerate_configurations(instance: Instance, server: int) -> list[Configuration]:
    """Every set of compatible jobs with pairwise-disjoint intervals on server, empty set included.

    Jobs are taken in arrival order; a disjoint set sorted by start also has
    increasing ends, so comparing with the last chosen end suffices.
    """
    jobs = sorted(
        (job for job in instance.jobs if server in job.compat),
        key=lambda job: (job.arrival_time, job.index),
    )
    if len(jobs) > ENUMERATION_LIMIT:
        raise TooLarge(
            f"server {server} has {len(jobs)} compatible jobs, "
            f"enumeration stops at {ENUMERATION_LIMIT}"
        )
    out: list[Configuration] = []

    def extend(start: int, chosen: list[int], last_end: float) -> None:
        out.append(Configuration(server=server, jobs=tuple(sorted(chosen))))
        for k in range(start, len(jobs)):
            job = jobs[k]
            if job.arrival_time < last_end:
                continue
            chosen.append(job.index)
            extend(k + 1, chosen, job.end_time(server))
            chosen.pop()

    extend(0, [], float("-inf"))
    logger.debug("server %d: %d configurations", server, len(out))
    return out
