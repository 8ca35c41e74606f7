"""Tests for the instance families."""

import math

import numpy as np
import pytest

from flblab.benchmarks import opt_exact
from flblab.engine import run
from flblab.generators import (
    BATCH_EPSILON,
    expected_duration,
    gen_batch_homogeneous,
    gen_lowerbound_distribution,
    gen_random_poisson,
    gen_random_small,
    gen_upper_triangular,
    gen_worstcase_geometric,
    lowerbound_expected_opt,
    sample_durations,
    trial_seed,
)
from flblab.models import DurationMode, FlbParams
from flblab.params import solve_fixed_reward_int, solve_for_instance, with_penalty_floor
from flblab.policies import BalancePolicy, FlbPolicy, GreedyPolicy
from flblab.special import harmonic

# ---------------------------------------------------------------------------
# Adversarial families
# ---------------------------------------------------------------------------


class TestWorstcaseGeometric:
    def test_middle_job(self):
        """Job 501 of 1000 arrives at t = 0.5 with r = sqrt(10) and d = 3."""
        instance = gen_worstcase_geometric(1000, 10.0, 10.0, 200)
        job = instance.jobs[500]
        assert job.arrival_time == 0.5
        assert job.reward[1] == pytest.approx(math.sqrt(10.0))
        assert job.duration[1] == 3.0

    def test_first_and_shape(self):
        instance = gen_worstcase_geometric(1000, 10.0, 10.0, 200)
        assert instance.servers == (200,)
        assert instance.num_jobs == 1000
        assert instance.jobs[0].reward[1] == 1.0
        assert instance.jobs[0].duration[1] == 1.0
        assert (instance.r_max, instance.d_max) == (10.0, 10.0)

    def test_values_increase(self):
        instance = gen_worstcase_geometric(200, 10.0, 10.0, 5)
        values = [job.value(1) for job in instance.jobs]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_truncation(self):
        assert gen_worstcase_geometric(100, 4.0, 4.0, 3, truncate_at=7).num_jobs == 7

    def test_truncation_out_of_range(self):
        with pytest.raises(ValueError):
            gen_worstcase_geometric(100, 4.0, 4.0, 3, truncate_at=101)


class TestLowerboundDistribution:
    def test_probabilities_sum_to_one(self):
        cases = gen_lowerbound_distribution(1000, 10.0, 10.0)
        assert len(cases) == 1000
        assert math.fsum(p for _, p in cases) == pytest.approx(1.0, abs=1e-12)
        assert all(p >= 0 for _, p in cases)

    def test_instance_k_offers_k_jobs(self):
        cases = gen_lowerbound_distribution(50, 10.0, 10.0)
        instance, _ = cases[9]
        assert instance.num_jobs == 50
        assert sum(1 for job in instance.jobs if job.compat) == 10

    def test_expected_opt_closed_form(self):
        """Expected OPT matches the closed form and sits near ln(RD)."""
        value = lowerbound_expected_opt(1000, 10.0, 10.0)
        assert value == pytest.approx(5.234206, abs=1e-5)
        assert math.log(100.0) - 0.5 <= value <= math.log(100.0) + 1.0

    def test_expected_opt_matches_exact(self):
        M = 200
        cases = gen_lowerbound_distribution(M, 10.0, 10.0)
        expected = math.fsum(p * opt_exact(instance) for instance, p in cases)
        assert expected == pytest.approx(lowerbound_expected_opt(M, 10.0, 10.0), rel=1e-12)

    @pytest.mark.slow
    def test_online_policies_earn_first_value(self):
        """Any online policy takes job 1 and is blocked for the rest."""
        M = 1000
        cases = gen_lowerbound_distribution(M, 10.0, 10.0)
        first = cases[0][0].jobs[0].value(1)
        assert first == pytest.approx(1.002305, abs=1e-6)
        flb = FlbPolicy(solve_for_instance(cases[0][0]).flb_params())
        for policy in (GreedyPolicy(), BalancePolicy(10.0, 10.0), flb):
            expected = math.fsum(p * run(instance, policy).total_reward for instance, p in cases)
            assert expected == pytest.approx(first, rel=1e-9)
            assert expected <= 1.05


class TestBatchHomogeneous:
    def test_layout(self):
        instance = gen_batch_homogeneous(4, 12, 10, 3)
        assert instance.num_jobs == 36
        assert instance.jobs[12].duration[1] == 2.0
        assert instance.jobs[12].arrival_time == pytest.approx(12 * BATCH_EPSILON)
        assert instance.d_max == 4.0

    def test_batch_must_exceed_capacity(self):
        with pytest.raises(ValueError):
            gen_batch_homogeneous(3, 10, 10, 3)

    def test_truncated_opt(self):
        """All jobs overlap, so OPT on batches 1..d is c * d."""
        instance = gen_batch_homogeneous(4, 12, 10, 3)
        assert opt_exact(instance) == 30.0

    def test_no_policy_beats_harmonic(self):
        """min over d of ALG_d / (c d) stays at or below 1/H(D)."""
        D, c, size = 5, 20, 30
        instance = gen_batch_homogeneous(D, size, c, D)
        flb = with_penalty_floor(solve_fixed_reward_int(D), 1.0, float(D), c)
        for policy in (GreedyPolicy(), BalancePolicy(1.0, float(D)), FlbPolicy(flb.flb_params())):
            rewards = run(instance, policy).cumulative_rewards()
            ratios = [rewards[d * size - 1] / (c * d) for d in range(1, D + 1)]
            assert min(ratios) <= 1.0 / harmonic(D) + 1e-12


class TestUpperTriangular:
    def test_layout(self):
        instance = gen_upper_triangular(3, 2)
        assert instance.servers == (2, 2, 2)
        assert [job.compat for job in instance.jobs[::2]] == [(1, 2, 3), (2, 3), (3,)]
        assert opt_exact(instance) == 6.0

    @pytest.mark.slow
    def test_flb_ratio(self):
        """FLB keeps at least (e-1)/e - 0.02 of OPT = n c."""
        n, c = 8, 1000
        instance = gen_upper_triangular(n, c)
        params = solve_for_instance(instance).flb_params()
        trace = run(instance, FlbPolicy(params))
        assert trace.total_reward / (n * c) >= 0.612

    @pytest.mark.slow
    def test_homogeneous_flb_ratio(self):
        """FLB(1, 1/(e-1), e) tuned for unit rewards and durations clears the same bar."""
        n, c = 8, 1000
        instance = gen_upper_triangular(n, c)
        params = FlbParams(gamma=1, eta=1.0 / (math.e - 1.0), beta=math.e)
        trace = run(instance, FlbPolicy(params))
        assert trace.total_reward / (n * c) >= 0.612


# ---------------------------------------------------------------------------
# Random families
# ---------------------------------------------------------------------------


class TestRandomPoisson:
    def test_same_seed_same_instance(self):
        first = gen_random_poisson(3, 5, 100, rate=10.0, seed=42)
        second = gen_random_poisson(3, 5, 100, rate=10.0, seed=42)
        assert first == second
        assert first != gen_random_poisson(3, 5, 100, rate=10.0, seed=43)

    def test_ranges(self):
        instance = gen_random_poisson(3, 5, 500, rate=50.0, seed=1)
        times = [job.arrival_time for job in instance.jobs]
        assert all(a <= b for a, b in zip(times, times[1:]))
        for job in instance.jobs:
            assert job.compat == (1, 2, 3)
            assert 1.0 <= job.reward[1] <= 10.0
            assert job.duration[1] in {float(k) for k in range(1, 11)}
            assert job.server_independent

    def test_mean_gap_follows_rate(self):
        instance = gen_random_poisson(1, 1, 4000, rate=20.0, seed=5)
        gaps = np.diff([0.0] + [job.arrival_time for job in instance.jobs])
        assert gaps.mean() == pytest.approx(1 / 20.0, rel=0.05)

    def test_duration_mean(self):
        """Monte-Carlo mean of the rounded durations matches the exact sum."""
        draws = sample_durations(200_000, 2.0, 3.0, np.random.default_rng(0))
        assert draws.mean() == pytest.approx(expected_duration(2.0, 3.0), abs=0.02)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            gen_random_poisson(1, 1, 10, rate=0.0)


class TestRandomSmall:
    def test_limits(self):
        for seed in range(50):
            instance = gen_random_small(seed)
            assert 1 <= instance.num_servers <= 2
            assert 1 <= instance.num_jobs <= 10
            assert max(instance.servers) <= 3
            for job in instance.jobs:
                assert job.compat
                assert (2 * job.arrival_time) == int(2 * job.arrival_time)
                assert all(r == int(r) and 1 <= r <= 3 for r in job.reward.values())

    def test_pooled(self):
        instance = gen_random_small(3, max_servers=3, pooled=True)
        servers = tuple(instance.server_ids())
        assert all(job.compat == servers and job.server_independent for job in instance.jobs)

    def test_real_durations(self):
        instance = gen_random_small(2, duration_mode=DurationMode.REAL)
        assert instance.duration_mode is DurationMode.REAL
        assert all(1.0 <= d <= 3.0 for job in instance.jobs for d in job.duration.values())

    def test_capacity_range(self):
        for seed in range(10):
            instance = gen_random_small(seed, min_capacity=60, max_capacity=120)
            assert all(60 <= c <= 120 for c in instance.servers)
        with pytest.raises(ValueError):
            gen_random_small(0, min_capacity=4, max_capacity=3)

    def test_trial_seed(self):
        assert trial_seed(1, 2, 3) == trial_seed(1, 2, 3)
        assert trial_seed(1, 2, 3) != trial_seed(1, 3, 2)
