"""Experiment drivers: each reads a config file and writes CSV (and SVG) files."""

from flblab.experiments.bounds import run_bounds
from flblab.experiments.certificates import run_certificates
from flblab.experiments.config import (
    BoundsConfig,
    CertificateConfig,
    RandomConfig,
    WorstcaseConfig,
    default_config_path,
    load_config,
)
from flblab.experiments.random_instances import run_random
from flblab.experiments.runner import ExperimentResult, TrialRunner
from flblab.experiments.worstcase import run_worstcase

EXPERIMENTS = {
    "worstcase": (WorstcaseConfig, run_worstcase),
    "random": (RandomConfig, run_random),
    "certificates": (CertificateConfig, run_certificates),
    "bounds": (BoundsConfig, run_bounds),
}

__all__ = [
    "EXPERIMENTS",
    "ExperimentResult",
    "TrialRunner",
    "default_config_path",
    "load_config",
]
