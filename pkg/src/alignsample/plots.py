"""Figure rendering for the report paths (winrate curves, score profiles).

Figures are written straight to files with the Agg backend; nothing here
opens a window. CSV/JSON outputs stay the canonical artifacts, the figures
are companions for quick inspection.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np

from .isa import ScoreVector
from .scaling_law import ScalingLawFit, WinratePoint, predict


def render_fit_figure(
    points: list[WinratePoint], fit: ScalingLawFit, path: str | Path
) -> None:
    """Observed winrates with the fitted plateau curve overlaid."""
    xs = np.array([p.x for p in points])
    ys = np.array([p.winrate for p in points])
    errs = [p.ci95 for p in points]
    grid = np.linspace(0.0, max(100.0, float(xs.max())), 400)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if all(e is not None for e in errs):
        ax.errorbar(xs, ys, yerr=[float(e) for e in errs], fmt="o", capsize=3, label="observed")
    else:
        ax.plot(xs, ys, "o", label="observed")
    label = f"fit ({fit.mode}): r={fit.r:.3f}, a={fit.a:.3f}, b={fit.b:.4f}"
    ax.plot(grid, predict(fit, grid), "-", label=label)
    ax.set_xlabel("data used (%)")
    ax.set_ylabel("winrate (%)")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_score_figure(scores: ScoreVector, path: str | Path) -> None:
    """Distribution of normalized log-likelihoods and entropy deltas."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.hist(scores.norm_ll, bins=min(50, max(5, len(scores) // 4)), color="#4878a8")
    ax1.set_xlabel("normalized log-likelihood")
    ax1.set_ylabel("count")
    ax2.hist(scores.contrib, bins=min(50, max(5, len(scores) // 4)), color="#a85448")
    ax2.set_xlabel("entropy delta")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
