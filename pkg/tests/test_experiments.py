"""Tests for experiment configs, the trial runner and the experiment drivers."""

import math
from pathlib import Path
from unittest.mock import MagicMock, patch

import pandas as pd
import pytest

from flblab.config import settings
from flblab.experiments import EXPERIMENTS, load_config
from flblab.experiments.bounds import bound_excess, fitted_constants, grid, loglog, run_bounds
from flblab.experiments.certificates import builtin_cases, certificate_frame, run_certificates
from flblab.experiments.config import (
    BoundsConfig,
    CertificateConfig,
    RandomConfig,
    WorstcaseConfig,
)
from flblab.experiments.random_instances import (
    random_trials,
    run_random,
    run_trial,
    summarize_trials,
)
from flblab.experiments.runner import TrialRunner
from flblab.experiments.worstcase import run_worstcase, worstcase_frame, worstcase_policy
from flblab.generators import RNG_ALGORITHM, gen_worstcase_geometric
from flblab.models import DurationMode
from flblab.output import read_csv
from flblab.params import solve_flbopt_int
from flblab.policies import FlbPolicy, GreedyPolicy

EXPERIMENTS_DIR = Path(__file__).resolve().parent.parent / "experiments"


def _square(x: int) -> int:
    return x * x


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------


class TestLoadConfig:
    @pytest.mark.parametrize("name", sorted(EXPERIMENTS))
    def test_shipped_configs_load(self, name):
        model, _ = EXPERIMENTS[name]
        config = load_config(EXPERIMENTS_DIR / f"{name}.conf", model)
        assert isinstance(config, model)

    def test_worstcase_values(self):
        config = load_config(EXPERIMENTS_DIR / "worstcase.conf", WorstcaseConfig)
        assert (config.M, config.R, config.D, config.c) == (1000, 10.0, 10.0, 200)
        assert config.policies == ["flb", "balance", "greedy"]

    def test_lists_and_pairs(self, tmp_path):
        path = tmp_path / "random.conf"
        path.write_text("capacities=5, 10\nrates=1,2.5\nbox_pairs=10:50,5:2.5\n")
        config = load_config(path, RandomConfig)
        assert config.capacities == [5, 10]
        assert config.rates == [1.0, 2.5]
        assert config.box_pairs == [(10, 50.0), (5, 2.5)]

    def test_modes_parsed(self, tmp_path):
        path = tmp_path / "certificates.conf"
        path.write_text("modes=real\n")
        assert load_config(path, CertificateConfig).modes == [DurationMode.REAL]

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bounds.conf"
        path.write_text("points=3\nmystery=1\n")
        with pytest.raises(ValueError, match="mystery"):
            load_config(path, BoundsConfig)

    def test_bad_pair(self, tmp_path):
        path = tmp_path / "random.conf"
        path.write_text("box_pairs=10-50\n")
        with pytest.raises(ValueError):
            load_config(path, RandomConfig)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            load_config(tmp_path / "absent.conf", WorstcaseConfig)

    def test_seed_falls_back_to_settings(self):
        """conftest sets FLBLAB_SEED=12345."""
        assert WorstcaseConfig().resolved_seed() == 12345
        assert WorstcaseConfig(seed=7).resolved_seed() == 7

    def test_trials_need_two(self):
        with pytest.raises(ValueError):
            RandomConfig(trials=1)


# ---------------------------------------------------------------------------
# Trial runner
# ---------------------------------------------------------------------------


class TestTrialRunner:
    def test_serial_map(self):
        with TrialRunner(workers=1) as runner:
            assert runner.map(_square, [3, 1, 2]) == [9, 1, 4]

    @patch("flblab.experiments.runner.ProcessPoolExecutor")
    def test_pool_keeps_submission_order(self, mock_pool_cls):
        pool = MagicMock()
        pool.submit.side_effect = lambda fn, task: MagicMock(
            result=MagicMock(return_value=fn(task))
        )
        mock_pool_cls.return_value = pool

        with TrialRunner(workers=3) as runner:
            assert runner.map(_square, [4, 2, 5]) == [16, 4, 25]

        mock_pool_cls.assert_called_once_with(max_workers=3)
        assert pool.submit.call_count == 3
        pool.shutdown.assert_called_once_with(wait=True)

    @patch("flblab.experiments.runner.ProcessPoolExecutor")
    def test_start_twice(self, mock_pool_cls):
        runner = TrialRunner(workers=2)
        runner.start()
        runner.start()
        assert mock_pool_cls.call_count == 1
        runner.shutdown()

    def test_workers_default_from_settings(self):
        assert TrialRunner().workers == 1


# ---------------------------------------------------------------------------
# Worst-case experiment
# ---------------------------------------------------------------------------


class TestWorstcase:
    def test_policy_selection(self):
        config = WorstcaseConfig(M=10, c=2)
        instance = gen_worstcase_geometric(10, 10.0, 10.0, 2)
        flb = worstcase_policy("flb", config, instance)
        assert isinstance(flb, FlbPolicy)
        assert flb.params == solve_flbopt_int(10.0, 10).flb_params()
        assert isinstance(worstcase_policy("greedy", config, instance), GreedyPolicy)

    def test_small_run(self, tmp_path):
        config = WorstcaseConfig(M=50, c=10)
        result = run_worstcase(config, tmp_path)
        assert result.rows == 150
        assert result.files == [tmp_path / "worstcase.csv"]
        assert (tmp_path / "worstcase.csv").read_text().startswith("# generated")

        frame = read_csv(tmp_path / "worstcase.csv")
        assert list(frame["m"].unique()) == list(range(1, 51))
        assert ((frame["ratio"] > 0) & (frame["ratio"] <= 1.0 + 1e-12)).all()
        greedy = frame[frame["policy"] == "greedy"]
        assert greedy["ratio"].iloc[0] == 1.0

    def test_svg_written(self, tmp_path):
        result = run_worstcase(WorstcaseConfig(M=20, c=4, policies=["greedy"]), tmp_path, "svg")
        assert tmp_path / "worstcase.svg" in result.files
        assert (tmp_path / "worstcase.svg").read_text().lstrip().startswith("<?xml")

    @pytest.mark.slow
    def test_full_family(self):
        """FLB stays above 1/ln(RD) minus slack; GREEDY collapses at the end."""
        frame = worstcase_frame(WorstcaseConfig(policies=["flb", "greedy"]))
        flb = frame[frame["policy"] == "flb"]
        greedy = frame[frame["policy"] == "greedy"]
        assert flb["ratio"].min() >= 0.2171
        assert greedy["ratio"].iloc[-1] < 0.1


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


class TestRandom:
    def test_summary_statistics(self):
        trials = pd.DataFrame(
            [
                {"c": 5, "rate": 1.0, "policy": "greedy", "ratio": 0.5, "capacity_violation": False},
                {"c": 5, "rate": 1.0, "policy": "greedy", "ratio": 0.7, "capacity_violation": False},
                {"c": 5, "rate": 1.0, "policy": "flb", "ratio": math.nan, "capacity_violation": True},
                {"c": 5, "rate": 1.0, "policy": "flb", "ratio": 0.9, "capacity_violation": False},
            ]
        )
        summary = summarize_trials(trials).set_index("policy")
        greedy = summary.loc["greedy"]
        assert greedy["trials"] == 2
        assert greedy["mean_ratio"] == pytest.approx(0.6)
        assert greedy["sd_ratio"] == pytest.approx(math.sqrt(0.02))
        assert greedy["ci_low"] == pytest.approx(0.6 - 0.196, abs=1e-9)
        assert greedy["ci_high"] == pytest.approx(0.6 + 0.196, abs=1e-9)
        flb = summary.loc["flb"]
        assert flb["trials"] == 1
        assert flb["sd_ratio"] == 0.0
        assert flb["capacity_violations"] == 1

    def test_tiny_run(self, tmp_path):
        config = RandomConfig(
            n=1,
            capacities=[2],
            m=20,
            rates=[5.0],
            trials=2,
            policies=["greedy", "balance"],
            box_pairs=[(2, 5.0)],
        )
        result = run_random(config, tmp_path)
        assert result.violations == 0
        assert result.rows == 2
        trials = read_csv(tmp_path / "random_trials.csv")
        assert len(trials) == 4
        assert (trials["ratio"] <= 1.0 + 1e-12).all()
        header = (tmp_path / "random_trials.csv").read_text().splitlines()[0]
        assert f"rng={RNG_ALGORITHM}" in header

    @patch("flblab.experiments.random_instances.TrialRunner")
    def test_tasks_carry_resolved_seed(self, mock_runner_cls, monkeypatch):
        """A worker that never saw the seed override still draws the same instances."""
        monkeypatch.setattr(settings, "seed", 999)
        config = RandomConfig(
            n=1, capacities=[2], m=10, rates=[2.0], trials=2, policies=["greedy"]
        )
        runner = mock_runner_cls.return_value.__enter__.return_value
        runner.map.return_value = []
        random_trials(config)
        _, tasks = runner.map.call_args.args
        assert [task[0].seed for task in tasks] == [999, 999]
        assert config.seed is None

        expected = [run_trial(task) for task in tasks]
        monkeypatch.setattr(settings, "seed", 1)
        assert [run_trial(task) for task in tasks] == expected

    @pytest.mark.slow
    def test_greedy_leads_under_light_load(self):
        """At c = 50 and one arrival per unit time nothing is turned away by GREEDY."""
        config = RandomConfig(capacities=[50], rates=[1.0], trials=10)
        means = summarize_trials(random_trials(config)).set_index("policy")["mean_ratio"]
        assert means["greedy"] == pytest.approx(1.0)
        assert means["greedy"] >= means["flb"]

    @pytest.mark.slow
    def test_flb_leads_under_heavy_load(self):
        config = RandomConfig(capacities=[10], rates=[50.0], trials=20)
        means = summarize_trials(random_trials(config)).set_index("policy")["mean_ratio"]
        assert means.idxmax() == "flb"

    def test_same_seed_same_output(self, tmp_path):
        config = RandomConfig(
            n=1, capacities=[1], m=10, rates=[2.0], trials=2, policies=["greedy"], seed=3
        )
        run_random(config, tmp_path / "a")
        run_random(config, tmp_path / "b")
        first = read_csv(tmp_path / "a" / "random_trials.csv")
        second = read_csv(tmp_path / "b" / "random_trials.csv")
        pd.testing.assert_frame_equal(first, second)


# ---------------------------------------------------------------------------
# Certificates and bounds
# ---------------------------------------------------------------------------


class TestCertificates:
    def test_builtin_cases(self):
        names = [name for name, _, _ in builtin_cases()]
        assert names == ["single-job", "empty", "overlap-pair"]

    def test_small_suite(self, tmp_path):
        config = CertificateConfig(trials=3, modes=[DurationMode.INTEGER])
        result = run_certificates(config, tmp_path)
        assert result.rows == 6
        assert result.violations == 0
        frame = read_csv(tmp_path / "certificates.csv")
        assert frame.loc[0, "instance_id"] == "single-job"
        assert (frame["dual_objective"] >= frame["opt"] - 1e-9).all()
        header = (tmp_path / "certificates.csv").read_text().splitlines()[0]
        assert f"seed={settings.seed} rng={RNG_ALGORITHM}" in header

    @patch("flblab.experiments.certificates.TrialRunner")
    def test_tasks_carry_resolved_seed(self, mock_runner_cls, monkeypatch):
        monkeypatch.setattr(settings, "seed", 999)
        runner = mock_runner_cls.return_value.__enter__.return_value
        runner.map.return_value = []
        frame = certificate_frame(CertificateConfig(trials=2, modes=[DurationMode.REAL]))
        assert len(frame) == 3
        _, tasks = runner.map.call_args.args
        assert [(config.seed, mode, trial) for config, mode, trial in tasks] == [
            (999, DurationMode.REAL, 0),
            (999, DurationMode.REAL, 1),
        ]

    def test_capacity_range_checked(self):
        with pytest.raises(ValueError):
            CertificateConfig(min_capacity=5, max_capacity=3)


class TestBounds:
    def test_loglog_floor(self):
        assert loglog(1.0, 1.0) == 0.0
        assert loglog(10.0, 2.0) == pytest.approx(math.log(math.log(10.0)))

    def test_excess_at_ten(self):
        """Integer bound 7.695383 at R = D = 10 leaves about 2.2562."""
        assert bound_excess("int", 10.0, 10.0, 7.695383) == pytest.approx(2.256181, abs=1e-5)

    def test_integer_grid_rounds_durations(self):
        config = BoundsConfig(points=3, low=1, high=10)
        assert sorted({D for _, D in grid(config, "int")}) == [1.0, 3.0, 10.0]
        assert len(grid(config, "real")) == 9

    def test_small_run(self, tmp_path):
        result = run_bounds(BoundsConfig(points=3, low=1, high=100), tmp_path)
        assert result.rows == 18
        frame = read_csv(tmp_path / "bounds.csv")
        constants = fitted_constants(frame)
        assert constants["int"] <= 6.0
        assert constants["real"] <= 25.0
        summary = read_csv(tmp_path / "bounds_summary.csv")
        assert list(summary["solver"]) == ["int", "real"]

    @pytest.mark.slow
    def test_default_grid_constants(self, tmp_path):
        """20 x 20 grid over [1, 1000]: int about 3.0298, real about 14.2832."""
        run_bounds(BoundsConfig(), tmp_path)
        constants = fitted_constants(read_csv(tmp_path / "bounds.csv"))
        assert constants["int"] == pytest.approx(3.0298, abs=1e-3)
        assert constants["real"] == pytest.approx(14.2832, abs=1e-3)

    def test_unknown_solver(self, tmp_path):
        with pytest.raises(ValueError, match="unknown solvers"):
            run_bounds(BoundsConfig(points=2, solvers=["mystery"]), tmp_path)
