"""Figure rendering for report paths. All figures go to files; no interactive
backend is ever required."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .scoring_selection import ScoreBundle, SelectionResult
from .synthetic_bench import BenchReport, BenchSamples


def render_bench_figures(report: BenchReport, samples: BenchSamples, out_dir) -> list:
    """Recall-vs-ratio curves and the max-cost separation histogram."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    fig, ax = plt.subplots(figsize=(6, 4))
    ratios = np.array(report.ratios)
    for label, stats in (
        ("forensic", report.recall_forensic),
        ("saliency proxy", report.recall_saliency),
    ):
        mean = np.array([stats[r][0] for r in report.ratios])
        std = np.array([stats[r][1] for r in report.ratios])
        ax.plot(ratios, mean, marker="o", label=label)
        ax.fill_between(ratios, mean - std, mean + std, alpha=0.2)
    ax.set_xlabel("retention ratio")
    ax.set_ylabel("artifact recall")
    ax.set_ylim(-0.05, 1.05)
    ax.legend()
    ax.set_title(f"artifact recall vs retention ({report.trials} trials)")
    fig.tight_layout()
    path = out / "recall_vs_ratio.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6, 4))
    lo = min(samples.max_cost_pristine.min(), samples.max_cost_forged.min())
    hi = max(samples.max_cost_pristine.max(), samples.max_cost_forged.max())
    bins = np.linspace(lo, hi * 1.02 + 1e-12, 40)
    ax.hist(samples.max_cost_pristine, bins=bins, alpha=0.6, label="pristine")
    ax.hist(samples.max_cost_forged, bins=bins, alpha=0.6, label="forged")
    ax.set_xlabel("per-sequence max transport cost")
    ax.set_ylabel("sequences")
    ax.legend()
    ax.set_title(f"cost separation (AUC {report.auc_max_cost:.3f})")
    fig.tight_layout()
    path = out / "cost_separation.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)
    return paths


def render_score_figures(
    bundle: ScoreBundle, out_dir, selection: SelectionResult | None = None
) -> list:
    """Frame-by-token score heatmap, plus the kept mask when a selection is given."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    scores = np.stack([fs.score for fs in bundle.frames])
    fig, ax = plt.subplots(figsize=(8, 3 + 0.1 * scores.shape[0]))
    im = ax.imshow(scores, aspect="auto", interpolation="nearest", cmap="magma")
    fig.colorbar(im, ax=ax, label="score")
    ax.set_xlabel("token index")
    ax.set_ylabel("frame")
    ax.set_title("per-token scores")
    fig.tight_layout()
    path = out / "scores.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    if selection is not None:
        mask = np.zeros_like(scores)
        for fs in selection.frames:
            mask[fs.frame, list(fs.kept)] = 1.0
        fig, ax = plt.subplots(figsize=(8, 3 + 0.1 * mask.shape[0]))
        ax.imshow(mask, aspect="auto", interpolation="nearest", cmap="gray_r")
        ax.set_xlabel("token index")
        ax.set_ylabel("frame")
        ax.set_title("retained tokens (dark = kept)")
        fig.tight_layout()
        path = out / "kept_mask.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths
