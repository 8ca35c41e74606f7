"""Offline optimum and primal-dual certificates."""

from flblab.benchmarks.certificates import construct_dual, verify_certificate
from flblab.benchmarks.configurations import enumerate_configurations
from flblab.benchmarks.opt import opt_exact

__all__ = ["construct_dual", "enumerate_configurations", "opt_exact", "verify_certificate"]
