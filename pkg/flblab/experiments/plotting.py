"""SVG charts for the experiment CSVs."""

import logging
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
# Stable element ids, so repeated runs write identical SVG.
matplotlib.rcParams["svg.hashsalt"] = "flblab"

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

logger = logging.getLogger(__name__)


def _save(fig: plt.Figure, path: Union[Path, str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("Wrote %s", path)
    return path


def plot_worstcase(frame: pd.DataFrame, reference: float, path: Union[Path, str]) -> Path:
    """Performance ratio against truncation point, one line per policy."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for policy, group in frame.groupby("policy", sort=False):
        ax.plot(group["m"], group["ratio"], label=policy, linewidth=1.2)
    ax.axhline(reference, color="black", linestyle="-", linewidth=1.0, label="1/ln(RD)")
    ax.set_xlabel("number of jobs m")
    ax.set_ylabel("ALG / OPT")
    ax.set_ylim(0, 1.05)
    ax.legend()
    return _save(fig, path)


def plot_random(frame: pd.DataFrame, path: Union[Path, str]) -> Path:
    """Mean ratio with its 95% band against arrival rate, one panel per capacity."""
    capacities = sorted(frame["c"].unique())
    fig, axes = plt.subplots(
        1, len(capacities), figsize=(4 * len(capacities), 3.5), squeeze=False, sharey=True
    )
    for ax, c in zip(axes[0], capacities):
        sub = frame[frame["c"] == c]
        for policy, group in sub.groupby("policy", sort=False):
            ax.plot(group["rate"], group["mean_ratio"], label=policy)
            ax.fill_between(group["rate"], group["ci_low"], group["ci_high"], alpha=0.25)
        ax.set_title(f"c = {c}")
        ax.set_xlabel("arrival rate")
    axes[0][0].set_ylabel("mean ALG / OPT")
    axes[0][0].legend()
    return _save(fig, path)


def plot_boxes(frame: pd.DataFrame, path: Union[Path, str]) -> Path:
    pairs = list(frame.groupby(["c", "rate"], sort=False))
    fig, axes = plt.subplots(1, len(pairs), figsize=(4 * len(pairs), 3.5), squeeze=False)
    for ax, ((c, rate), sub) in zip(axes[0], pairs):
        policies = list(dict.fromkeys(sub["policy"]))
        ax.boxplot([sub[sub["policy"] == p]["ratio"] for p in policies])
        ax.set_xticks(range(1, len(policies) + 1), policies)
        ax.set_title(f"c = {c}, rate = {rate:g}")
    axes[0][0].set_ylabel("ALG / OPT")
    return _save(fig, path)
