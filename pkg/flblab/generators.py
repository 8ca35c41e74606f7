"""Instance families: adversarial, lower-bound, batch, random and small test instances.

Random families draw from ``numpy.random.default_rng`` (PCG64) so a seed
fixes the instance.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy import stats

from flblab.models import DurationMode, Instance, JobArrival

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "PCG64"
BATCH_EPSILON = 1e-6
TRUNCNORM_LOW = 0.0
TRUNCNORM_HIGH = 10.0


def trial_seed(seed: int, *keys: int) -> int:
    """Independent 32-bit seed for one (seed, keys...) combination."""
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def _single_server_job(index: int, t: float, reward: float, duration: float) -> JobArrival:
    return JobArrival(
        index=index,
        arrival_time=t,
        compat=(1,),
        reward={1: reward},
        duration={1: duration},
    )


def _pooled_job(
    index: int, t: float, servers: tuple[int, ...], reward: float, duration: float
) -> JobArrival:
    return JobArrival(
        index=index,
        arrival_time=t,
        compat=servers,
        reward={s: reward for s in servers},
        duration={s: duration for s in servers},
    )


# ---------------------------------------------------------------------------
# Adversarial families
# ---------------------------------------------------------------------------


def geometric_job(j: int, M: int, R: float, D: float) -> tuple[float, float]:
    """(reward, duration) of job j when t = j/M scales R^t and floor(D^t)."""
    t = j / M
    return R**t, float(max(1, math.floor(D**t)))


def gen_worstcase_geometric(
    M: int, R: float, D: float, c: int, truncate_at: Optional[int] = None
) -> Instance:
    """Jobs j = 1..truncate_at at t = (j-1)/M with r = R^t and d = max(1, floor(D^t))."""
    truncate_at = M if truncate_at is None else truncate_at
    if not 1 <= truncate_at <= M:
        raise ValueError(f"truncate_at must be in [1, {M}], got {truncate_at}")
    jobs = []
    for j in range(1, truncate_at + 1):
        reward, duration = geometric_job(j - 1, M, R, D)
        jobs.append(_single_server_job(j, (j - 1) / M, reward, duration))
    return Instance(servers=(c,), jobs=tuple(jobs), r_max=R, d_max=D)


def gen_lowerbound_distribution(M: int, R: float, D: float) -> list[tuple[Instance, float]]:
    """M instances on one unit-capacity server; instance k offers jobs 1..k.

    Jobs after k still arrive but have no compatible server. Instance k has
    probability v1/v_k - v1/v_(k+1) (v1/v_M for the last), v_k = r_k d_k.
    """
    if M < 1:
        raise ValueError(f"M must be positive, got {M}")
    shape = [geometric_job(j, M, R, D) for j in range(1, M + 1)]
    values = [r * d for r, d in shape]
    offered = [
        _single_server_job(j, j / M, r, d) for j, (r, d) in enumerate(shape, start=1)
    ]
    withheld = [JobArrival(index=j, arrival_time=j / M) for j in range(1, M + 1)]
    probabilities = [values[0] / values[k] - values[0] / values[k + 1] for k in range(M - 1)]
    probabilities.append(values[0] / values[-1])
    total = math.fsum(probabilities)
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"lower-bound probabilities sum to {total}")
    return [
        (
            Instance(
                servers=(1,),
                jobs=tuple(offered[:k] + withheld[k:]),
                r_max=R,
                d_max=D,
            ),
            p,
        )
        for k, p in enumerate(probabilities, start=1)
    ]


def lowerbound_expected_opt(M: int, R: float, D: float) -> float:
    """v1 * (1 + sum_{k<M} (1 - v_k / v_(k+1)))."""
    values = [r * d for r, d in (geometric_job(j, M, R, D) for j in range(1, M + 1))]
    return values[0] * (1.0 + math.fsum(1.0 - values[k] / values[k + 1] for k in range(M - 1)))


def gen_batch_homogeneous(D: int, batch_size: int, c: int, truncate_batch: int) -> Instance:
    """Batches 1..truncate_batch of unit-reward jobs; batch d has duration d."""
    if not 1 <= truncate_batch <= D:
        raise ValueError(f"truncate_batch must be in [1, {D}], got {truncate_batch}")
    if batch_size <= c:
        raise ValueError(f"batch_size must exceed c={c}, got {batch_size}")
    jobs = []
    for d in range(1, truncate_batch + 1):
        for _ in range(batch_size):
            index = len(jobs) + 1
            jobs.append(_single_server_job(index, (index - 1) * BATCH_EPSILON, 1.0, float(d)))
    return Instance(servers=(c,), jobs=tuple(jobs), r_max=1.0, d_max=float(D))


def gen_upper_triangular(n: int, c: int) -> Instance:
    """n groups of c unit jobs; group k fits servers k..n only. OPT is n * c."""
    jobs = []
    for k in range(1, n + 1):
        servers = tuple(range(k, n + 1))
        for _ in range(c):
            index = len(jobs) + 1
            jobs.append(_pooled_job(index, (index - 1) * BATCH_EPSILON, servers, 1.0, 1.0))
    return Instance(servers=(c,) * n, jobs=tuple(jobs), r_max=1.0, d_max=1.0)


# ---------------------------------------------------------------------------
# Random families
# ---------------------------------------------------------------------------


def _truncnorm(mu: float, sigma: float) -> stats.rv_continuous:
    a = (TRUNCNORM_LOW - mu) / sigma
    b = (TRUNCNORM_HIGH - mu) / sigma
    return stats.truncnorm(a, b, loc=mu, scale=sigma)


def sample_durations(
    size: int, mu: float, sigma: float, rng: np.random.Generator
) -> np.ndarray:
    """Ceiling of truncated-normal draws on [0, 10], clipped to [1, 10]."""
    draws = _truncnorm(mu, sigma).rvs(size=size, random_state=rng)
    return np.clip(np.ceil(draws), 1.0, TRUNCNORM_HIGH)


def expected_duration(mu: float, sigma: float) -> float:
    """sum_k k * P(k - 1 < X <= k) for the truncated normal X on [0, 10]."""
    cdf = _truncnorm(mu, sigma).cdf(np.arange(0, int(TRUNCNORM_HIGH) + 1))
    return float(np.sum(np.arange(1, int(TRUNCNORM_HIGH) + 1) * np.diff(cdf)))


def gen_random_poisson(
    n: int,
    c: int,
    m: int,
    rate: float,
    mu: float = 2.0,
    sigma: float = 3.0,
    seed: Optional[int] = None,
) -> Instance:
    """n identical servers and m jobs with exponential inter-arrival times.

    A job's reward and duration are shared by every server.
    """
    if min(n, c, m) < 1 or rate <= 0 or sigma <= 0:
        raise ValueError("n, c, m, rate and sigma must be positive")
    rng = np.random.default_rng(seed)
    times = np.cumsum(rng.exponential(1.0 / rate, size=m))
    rewards = np.maximum(_truncnorm(mu, sigma).rvs(size=m, random_state=rng), 1.0)
    durations = sample_durations(m, mu, sigma, rng)
    servers = tuple(range(1, n + 1))
    jobs = [
        _pooled_job(j, float(t), servers, float(r), float(d))
        for j, (t, r, d) in enumerate(zip(times, rewards, durations), start=1)
    ]
    logger.debug("poisson instance n=%d c=%d m=%d rate=%s seed=%s", n, c, m, rate, seed)
    return Instance(
        servers=(c,) * n,
        jobs=tuple(jobs),
        r_max=TRUNCNORM_HIGH,
        d_max=TRUNCNORM_HIGH,
    )


def gen_random_small(
    seed: int,
    max_jobs: int = 10,
    max_servers: int = 2,
    max_capacity: int = 3,
    R: int = 3,
    D: int = 3,
    duration_mode: DurationMode = DurationMode.INTEGER,
    pooled: bool = False,
    min_capacity: int = 1,
) -> Instance:
    """Small instance with integer rewards, arrivals on a half-unit grid.

    Capacities are drawn from min_capacity..max_capacity. ``pooled`` makes
    every job compatible with every server at one reward and duration.
    """
    if not 1 <= min_capacity <= max_capacity:
        raise ValueError(
            f"need 1 <= min_capacity <= max_capacity, got {min_capacity} and {max_capacity}"
        )
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_servers + 1))
    servers = tuple(int(c) for c in rng.integers(min_capacity, max_capacity + 1, size=n))
    m = int(rng.integers(1, max_jobs + 1))
    all_servers = tuple(range(1, n + 1))
    t = 0.0
    jobs = []

    def draw_duration() -> float:
        if DurationMode(duration_mode) is DurationMode.INTEGER:
            return float(rng.integers(1, D + 1))
        return float(rng.uniform(1.0, D))

    for j in range(1, m + 1):
        t += 0.5 * int(rng.integers(0, 3))
        if pooled:
            jobs.append(
                _pooled_job(j, t, all_servers, float(rng.integers(1, R + 1)), draw_duration())
            )
            continue
        mask = rng.random(n) < 0.7
        if not mask.any():
            mask[rng.integers(0, n)] = True
        compat = tuple(s for s, keep in zip(all_servers, mask) if keep)
        jobs.append(
            JobArrival(
                index=j,
                arrival_time=t,
                compat=compat,
                reward={s: float(rng.integers(1, R + 1)) for s in compat},
                duration={s: draw_duration() for s in compat},
            )
        )
    return Instance(
        servers=servers,
        jobs=tuple(jobs),
        r_max=float(R),
        d_max=float(D),
        duration_mode=duration_mode,
    )
