"""Online job-assignment lab for Forward-Looking BALANCE and its baselines."""

__version__ = "0.1.0"
