"""Pytest configuration and fixtures."""

import os

import numpy as np
import pytest

# Set test environment variables before importing flblab modules
os.environ["FLBLAB_LOG_LEVEL"] = "WARNING"
os.environ["FLBLAB_WORKERS"] = "1"
os.environ["FLBLAB_SEED"] = "12345"
os.environ["FLBLAB_OUT_DIR"] = "test-results"

from flblab.models import INFINITY, DurationMode, FlbParams, Instance, JobArrival  # noqa: E402
from flblab.params import solve_flbopt_int  # noqa: E402
from flblab.timeline import AvailabilityTimeline  # noqa: E402


def make_job(
    index: int,
    t: float,
    entries: dict[int, tuple[float, float]],
) -> JobArrival:
    """Job with {server: (reward, duration)} entries."""
    return JobArrival(
        index=index,
        arrival_time=t,
        compat=tuple(entries),
        reward={s: r for s, (r, _) in entries.items()},
        duration={s: d for s, (_, d) in entries.items()},
    )


def single_server(
    c: int,
    jobs: list[tuple[float, float, float]],
    mode: DurationMode = DurationMode.INTEGER,
) -> Instance:
    """Instance on one server from (t, reward, duration) triples."""
    return Instance.from_jobs(
        [c],
        [make_job(k, t, {1: (r, d)}) for k, (t, r, d) in enumerate(jobs, start=1)],
        duration_mode=mode,
    )


def pooled_load(
    seed: int,
    n_jobs: int = 150,
    capacity: int = 20,
    R: int = 2,
    D: int = 2,
    mode: DurationMode = DurationMode.INTEGER,
) -> Instance:
    """Two servers of one capacity and a dense stream over [0, 10], rewards in 1..R."""
    rng = np.random.default_rng(seed)
    times = np.sort(rng.uniform(0, 10, size=n_jobs))
    jobs = []
    for j, t in enumerate(times, start=1):
        r = float(rng.integers(1, R + 1))
        if mode is DurationMode.INTEGER:
            d = float(rng.integers(1, D + 1))
        else:
            d = float(rng.uniform(1.0, D))
        jobs.append(
            JobArrival(
                index=j,
                arrival_time=float(t),
                compat=(1, 2),
                reward={1: r, 2: r},
                duration={1: d, 2: d},
            )
        )
    return Instance(
        servers=(capacity, capacity),
        jobs=tuple(jobs),
        r_max=float(R),
        d_max=float(D),
        duration_mode=mode,
    )


@pytest.fixture
def homogeneous_params() -> FlbParams:
    """gamma = 1, eta = 1/(e-1), beta = e."""
    return solve_flbopt_int(1.0, 1, INFINITY).flb_params()


@pytest.fixture
def example_state() -> dict[int, AvailabilityTimeline]:
    """Two servers of capacity 4 at t = 4: ends {4.8, 5} and {5.2, 6.3}."""
    return {
        1: AvailabilityTimeline(4, [4.8, 5.0]),
        2: AvailabilityTimeline(4, [5.2, 6.3]),
    }


@pytest.fixture
def example_job() -> JobArrival:
    """Duration 2 on both servers; server 2 pays 1.1 per period."""
    return make_job(1, 4.0, {1: (1.0, 2.0), 2: (1.1, 2.0)})


@pytest.fixture
def overlap_instance() -> Instance:
    """c = 1, jobs (t=0, r=1, d=1) and (t=0.5, r=3, d=1)."""
    return single_server(1, [(0.0, 1.0, 1.0), (0.5, 3.0, 1.0)])
