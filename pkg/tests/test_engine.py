"""Tests for the arrival-by-arrival simulator and trace output."""

import pytest

from flblab.engine import TRACE_COLUMNS, initial_state, run, trace_frame, write_trace_csv
from flblab.exceptions import CapacityViolation
from flblab.generators import gen_random_small
from flblab.models import CommitMode, DurationMode, FlbParams
from flblab.output import read_csv
from flblab.params import solve_for_instance
from flblab.policies import BalancePolicy, FlbPolicy, GreedyPolicy
from tests.conftest import pooled_load, single_server

# Psi(0) = 0.01, far too small to keep a unit-reward job off a full server.
WEAK_PARAMS = FlbParams(gamma=1, eta=0.01, beta=2.0)


class TestRun:
    def test_greedy_blocked_by_overlap(self):
        """Second job arrives while the only unit is busy."""
        instance = single_server(1, [(0.0, 1.0, 1.0), (0.5, 1.0, 1.0)])
        trace = run(instance, GreedyPolicy())
        assert trace.total_reward == 1.0
        assert trace.assignments() == {1: 1}

    def test_unit_free_at_exact_end(self):
        """A unit released at t + d serves a job arriving at t + d."""
        instance = single_server(1, [(0.0, 1.0, 1.0), (1.0, 1.0, 1.0)])
        trace = run(instance, GreedyPolicy())
        assert trace.total_reward == 2.0

    def test_one_decision_per_job(self):
        instance = gen_random_small(4)
        trace = run(instance, GreedyPolicy())
        assert [d.job for d in trace.decisions] == list(range(1, instance.num_jobs + 1))

    def test_deterministic(self):
        """Same instance and policy give the same trace."""
        instance = gen_random_small(9, max_jobs=10)
        policy = FlbPolicy(solve_for_instance(instance).flb_params())
        first = run(instance, policy)
        second = run(instance, policy)
        assert first.model_dump() == second.model_dump()

    def test_cumulative_rewards(self):
        instance = single_server(2, [(0.0, 1.0, 2.0), (0.0, 3.0, 1.0), (0.5, 2.0, 1.0)])
        trace = run(instance, GreedyPolicy())
        assert trace.cumulative_rewards() == [2.0, 5.0, 5.0]

    def test_initial_state_matches_capacities(self):
        instance = single_server(3, [])
        state = initial_state(instance)
        assert list(state) == [1]
        assert state[1].capacity == 3


class TestCommitModes:
    def test_enforcing_raises_on_over_commit(self):
        instance = single_server(1, [(0.0, 1.0, 1.0), (0.5, 1.0, 1.0)])
        with pytest.raises(CapacityViolation) as exc:
            run(instance, FlbPolicy(WEAK_PARAMS))
        assert (exc.value.job, exc.value.server) == (2, 1)

    def test_hypothetical_records_over_commit(self):
        instance = single_server(1, [(0.0, 1.0, 1.0), (0.5, 1.0, 1.0)])
        trace = run(instance, FlbPolicy(WEAK_PARAMS), CommitMode.HYPOTHETICAL)
        assert trace.capacity_violations == [(2, 1)]
        assert trace.total_reward == 2.0
        assert trace.decisions[-1].min_availability_after == -1.0

    def test_solved_params_stay_within_capacity(self):
        """Solved parameters never over-commit, even in hypothetical mode."""
        for seed in range(20):
            instance = gen_random_small(seed, max_capacity=3)
            params = solve_for_instance(instance).flb_params()
            trace = run(instance, FlbPolicy(params), CommitMode.HYPOTHETICAL)
            assert trace.capacity_violations == []

    @pytest.mark.slow
    @pytest.mark.parametrize("mode", [DurationMode.INTEGER, DurationMode.REAL])
    def test_solved_params_enforcing_suite(self, mode):
        """Small capacities, mostly on the penalty floor, stay within capacity."""
        for seed in range(500):
            instance = gen_random_small(
                seed, max_jobs=30, max_servers=3, max_capacity=8, duration_mode=mode
            )
            params = solve_for_instance(instance).flb_params()
            trace = run(instance, FlbPolicy(params))
            assert trace.capacity_violations == []

    @pytest.mark.slow
    @pytest.mark.parametrize("mode", [DurationMode.INTEGER, DurationMode.REAL])
    @pytest.mark.parametrize("capacity", [60, 100, 200])
    def test_program_params_enforcing_suite(self, mode, capacity):
        """Dense loads at capacities where the programs solve without the penalty floor."""
        for seed in range(30):
            instance = pooled_load(
                seed, n_jobs=12 * capacity, capacity=capacity, R=3, D=3, mode=mode
            )
            solved = solve_for_instance(instance)
            assert solved.path != "penalty_floor"
            trace = run(instance, FlbPolicy(solved.flb_params()))
            assert trace.capacity_violations == []
            assert trace.total_reward > 0

    def test_balance_never_over_commits(self):
        for seed in range(20):
            instance = gen_random_small(seed)
            policy = BalancePolicy(instance.r_max, instance.d_max)
            trace = run(instance, policy, CommitMode.HYPOTHETICAL)
            assert trace.capacity_violations == []


class TestTraceOutput:
    def test_frame_columns_and_reject(self):
        instance = single_server(1, [(0.0, 1.0, 1.0), (0.5, 1.0, 1.0)])
        frame = trace_frame(run(instance, GreedyPolicy()))
        assert list(frame.columns) == TRACE_COLUMNS
        assert list(frame["server_or_reject"]) == ["1", "reject"]

    def test_csv_round_trip(self, tmp_path):
        """CSV starts with a generated comment and reads back with pandas."""
        instance = single_server(1, [(0.0, 1.0, 1.0), (1.0, 2.0, 1.0)])
        path = write_trace_csv(run(instance, GreedyPolicy()), tmp_path / "trace.csv")
        assert path.read_text().startswith("# generated ")
        frame = read_csv(path)
        assert list(frame.columns) == TRACE_COLUMNS
        assert list(frame["reward_collected"]) == [1.0, 2.0]
