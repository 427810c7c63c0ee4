"""Figure rendering for the scenario drivers (headless, file output only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_fig1(result, path, max_paths: int = 50) -> None:
    """Overlay sampled position tracks from both models on one x/y plot."""
    fig, ax = plt.subplots(figsize=(8.0, 5.0))
    shown = min(max_paths, result.markov_paths.shape[0])
    for run in range(shown):
        ax.plot(
            result.markov_paths[run, :, 0],
            result.markov_paths[run, :, 2],
            color="tab:orange",
            linestyle="--",
            linewidth=0.7,
            alpha=0.6,
            label="plain motion model" if run == 0 else None,
        )
    for run in range(shown):
        ax.plot(
            result.bridge_paths[run, :, 0],
            result.bridge_paths[run, :, 2],
            color="tab:blue",
            linewidth=0.7,
            alpha=0.6,
            label="destination-coupled model" if run == 0 else None,
        )
    ax.set_xlabel("x position")
    ax.set_ylabel("y position")
    ax.set_title("Sampled trajectories")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_fig2(result, path) -> None:
    """Log-scale average prediction error per horizon for both arms."""
    fig, ax = plt.subplots(figsize=(8.0, 5.0))
    with np.errstate(divide="ignore"):
        ax.plot(
            result.horizons,
            np.log10(result.aee_markov),
            color="tab:orange",
            linestyle="--",
            marker="s",
            markersize=3,
            label="plain motion model",
        )
        ax.plot(
            result.horizons,
            np.log10(result.aee_bridge),
            color="tab:blue",
            marker="o",
            markersize=3,
            label="destination-coupled model",
        )
    ax.set_xlabel("prediction horizon (time step)")
    ax.set_ylabel("log10 average position error")
    ax.set_title("Prediction error versus horizon")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
