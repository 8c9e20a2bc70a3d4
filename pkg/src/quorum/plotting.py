"""Figures for run reports: detection-rate curve and score separation."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "legend.fontsize": 8,
    "figure.dpi": 120,
}


def plot_detection_curve(curve, path, title: str | None = None):
    """Detection rate vs. percentile of the score ranking, with the chance diagonal."""
    ks = [k for k, _ in curve]
    rates = [r for _, r in curve]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.0, 3.0))
        ax.plot(ks, rates, color="C0", lw=1.5, label="ensemble score")
        ax.plot([0, 100], [0, 1], color="0.6", lw=0.8, ls="--", label="random")
        ax.set_xlim(0, 100)
        ax.set_ylim(0, 1.02)
        ax.set_xlabel("top k% of samples by score")
        ax.set_ylabel("detection rate")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_scores(scores, path, labels=None, flagged=None):
    """Scores in sample order; true anomalies (if known) drawn in red."""
    scores = np.asarray(scores, dtype=float)
    idx = np.arange(len(scores))
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.0))
        if labels is None:
            ax.scatter(idx, scores, s=6, color="C0")
        else:
            labels = np.asarray(labels, dtype=bool)
            ax.scatter(idx[~labels], scores[~labels], s=6, color="C0", label="normal")
            ax.scatter(idx[labels], scores[labels], s=14, color="C3", label="anomaly")
            ax.legend(loc="upper right")
        if flagged is not None and len(flagged):
            ax.axhline(scores[np.asarray(flagged)].min(), color="0.4", lw=0.8, ls=":")
        ax.set_xlabel("sample index")
        ax.set_ylabel("anomaly score")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)
