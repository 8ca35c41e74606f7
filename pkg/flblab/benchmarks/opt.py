"""Offline optimum of an instance.

Three exact routes, tried in order:

* clique: every occupancy interval shares a time point, so the best
  solution keeps the sum(c_i) most valuable jobs;
* min-cost flow on the event-time line, when every job has the same reward
  and duration on all servers and is compatible with all of them;
* branch and bound over (server or reject) per job for small instances.
"""

import heapq
import logging
import math
from typing import Optional

from flblab.exceptions import TooLarge
from flblab.models import Instance, JobArrival

logger = logging.getLogger(__name__)

BRANCH_AND_BOUND_LIMIT = 14


class FlowEdge:
    dst: int
    cap: int
    cost: float
    rev: int

    def __init__(self, dst: int, cap: int, cost: float, rev: int):
        self.dst = dst
        self.cap = cap
        self.cost = cost
        self.rev = rev


class FlowNetwork:
    """Residual graph with paired edges; parallel edges are allowed."""

    def __init__(self, size: int):
        self.adj: list[list[FlowEdge]] = [[] for _ in range(size)]

    def __len__(self) -> int:
        return len(self.adj)

    def add_edge(self, src: int, dst: int, *, cap: int, cost: float) -> FlowEdge:
        forward = FlowEdge(dst, cap, cost, len(self.adj[dst]))
        backward = FlowEdge(src, 0, -cost, len(self.adj[src]))
        self.adj[src].append(forward)
        self.adj[dst].append(backward)
        return forward

    def dag_potentials(self, source: int) -> list[float]:
        """Shortest distances when every positive-capacity edge points forward."""
        dist = [math.inf] * len(self)
        dist[source] = 0.0
        for u in range(source, len(self)):
            if dist[u] == math.inf:
                continue
            for edge in self.adj[u]:
                if edge.cap > 0 and dist[u] + edge.cost < dist[edge.dst]:
                    dist[edge.dst] = dist[u] + edge.cost
        return dist

    def _dijkstra(
        self, source: int, potential: list[float]
    ) -> tuple[list[float], list[Optional[tuple[int, int]]]]:
        dist = [math.inf] * len(self)
        parent: list[Optional[tuple[int, int]]] = [None] * len(self)
        dist[source] = 0.0
        heap = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for k, edge in enumerate(self.adj[u]):
                if edge.cap <= 0:
                    continue
                # Reduced costs are >= 0 up to rounding.
                nd = d + max(0.0, edge.cost + potential[u] - potential[edge.dst])
                if nd < dist[edge.dst]:
                    dist[edge.dst] = nd
                    parent[edge.dst] = (u, k)
                    heapq.heappush(heap, (nd, edge.dst))
        return dist, parent

    def min_cost_flow(self, source: int, sink: int, limit: int) -> float:
        """Successive shortest paths; stops once no path has negative cost."""
        potential = self.dag_potentials(source)
        potential = [p if p < math.inf else 0.0 for p in potential]
        total = 0.0
        sent = 0
        while sent < limit:
            dist, parent = self._dijkstra(source, potential)
            if dist[sink] == math.inf:
                break
            for v in range(len(self)):
                if dist[v] < math.inf:
                    potential[v] += dist[v]
            path_cost = potential[sink] - potential[source]
            if path_cost >= 0:
                break
            push = limit - sent
            v = sink
            while v != source:
                u, k = parent[v]
                push = min(push, self.adj[u][k].cap)
                v = u
            v = sink
            while v != source:
                u, k = parent[v]
                edge = self.adj[u][k]
                edge.cap -= push
                self.adj[edge.dst][edge.rev].cap += push
                v = u
            sent += push
            total += push * path_cost
        return total


def _active_jobs(instance: Instance) -> list[JobArrival]:
    return [job for job in instance.jobs if job.compat]


def _pooled(instance: Instance, jobs: list[JobArrival]) -> bool:
    """Every job sees all servers with one reward and one duration."""
    servers = tuple(instance.server_ids())
    return all(
        job.server_independent and tuple(sorted(job.compat)) == servers for job in jobs
    )


def _pooled_interval(job: JobArrival) -> tuple[float, float, float]:
    server = job.compat[0]
    return job.arrival_time, job.end_time(server), job.value(server)


def is_clique(instance: Instance) -> bool:
    jobs = _active_jobs(instance)
    if not jobs or not _pooled(instance, jobs):
        return False
    intervals = [_pooled_interval(job) for job in jobs]
    return max(s for s, _, _ in intervals) < min(e for _, e, _ in intervals)


def opt_clique(instance: Instance) -> float:
    values = sorted((_pooled_interval(j)[2] for j in _active_jobs(instance)), reverse=True)
    return math.fsum(values[: sum(instance.servers)])


def opt_min_cost_flow(instance: Instance) -> float:
    """Pooled capacity sum(c_i) flows along the time line; each job arc carries
    one unit at cost -r*d."""
    jobs = _active_jobs(instance)
    if not _pooled(instance, jobs):
        raise ValueError("min-cost flow needs server-independent, fully compatible jobs")
    if not jobs:
        return 0.0
    intervals = [_pooled_interval(job) for job in jobs]
    times = sorted({t for s, e, _ in intervals for t in (s, e)})
    node = {t: k for k, t in enumerate(times)}
    capacity = sum(instance.servers)
    network = FlowNetwork(len(times))
    for k in range(len(times) - 1):
        network.add_edge(k, k + 1, cap=capacity, cost=0.0)
    job_edges = [
        network.add_edge(node[s], node[e], cap=1, cost=-value) for s, e, value in intervals
    ]
    network.min_cost_flow(0, len(times) - 1, capacity)
    # Sum used job values directly so the result does not carry path-cost rounding.
    return math.fsum(
        value for edge, (_, _, value) in zip(job_edges, intervals) if edge.cap == 0
    )


def opt_branch_and_bound(instance: Instance) -> float:
    jobs = _active_jobs(instance)
    if len(jobs) > BRANCH_AND_BOUND_LIMIT:
        raise TooLarge(
            f"branch and bound handles at most {BRANCH_AND_BOUND_LIMIT} jobs, got {len(jobs)}"
        )
    best_values = [max(job.value(s) for s in job.compat) for job in jobs]
    remaining = [0.0] * (len(jobs) + 1)
    for k in range(len(jobs) - 1, -1, -1):
        remaining[k] = remaining[k + 1] + best_values[k]
    ends: dict[int, list[float]] = {s: [] for s in instance.server_ids()}
    best = 0.0

    def search(k: int, collected: float) -> None:
        nonlocal best
        if collected > best:
            best = collected
        if k == len(jobs) or collected + remaining[k] <= best:
            return
        job = jobs[k]
        options = sorted(job.compat, key=job.value, reverse=True)
        for server in options:
            busy = sum(1 for e in ends[server] if e > job.arrival_time)
            if busy >= instance.capacity(server):
                continue
            ends[server].append(job.end_time(server))
            search(k + 1, collected + job.value(server))
            ends[server].pop()
        search(k + 1, collected)

    search(0, 0.0)
    return best


def opt_exact(instance: Instance) -> float:
    """Maximum total r*d over capacity-feasible assignments."""
    jobs = _active_jobs(instance)
    if not jobs:
        return 0.0
    if is_clique(instance):
        return opt_clique(instance)
    if _pooled(instance, jobs):
        return opt_min_cost_flow(instance)
    if len(jobs) <= BRANCH_AND_BOUND_LIMIT:
        return opt_branch_and_bound(instance)
    raise TooLarge(
        f"no exact method for a heterogeneous instance with {len(jobs)} jobs"
    )
