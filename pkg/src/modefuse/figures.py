"""Matplotlib rendering of evaluation reports: a grouped mean/std bar
chart and the last iteration's ROC curves, written next to the report."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .harness import ENSEMBLE_KEY, METRIC_NAMES, EvalReport


def render_figures(report: EvalReport, out_dir, basename: str = "report"):
    """Write <basename>_metrics.png and (when curves exist) <basename>_roc.png."""
    paths = []
    summary = report.summary()
    keys = report.model_ids + [ENSEMBLE_KEY]

    fig, ax = plt.subplots(figsize=(9, 4.5))
    width = 0.8 / len(keys)
    x = np.arange(len(METRIC_NAMES))
    for i, key in enumerate(keys):
        means = [summary[key][n]["mean"] or 0.0 for n in METRIC_NAMES]
        stds = [summary[key][n]["std"] or 0.0 for n in METRIC_NAMES]
        ax.bar(x + i * width, means, width, yerr=stds, capsize=3,
               label="Ensemble" if key == ENSEMBLE_KEY else key)
    ax.set_xticks(x + 0.4 - width / 2)
    ax.set_xticklabels([n.capitalize() if n != "f1" else "F1 score" for n in METRIC_NAMES])
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("mean ± std over iterations")
    ax.legend(fontsize="small")
    fig.tight_layout()
    metrics_path = os.path.join(out_dir, f"{basename}_metrics.png")
    fig.savefig(metrics_path, dpi=120)
    plt.close(fig)
    paths.append(metrics_path)

    if report.roc_curves:
        fig, ax = plt.subplots(figsize=(5.5, 5))
        for key in keys:
            curve = report.roc_curves.get(key)
            if curve is None:
                continue
            ax.plot(curve.points[:, 0], curve.points[:, 1],
                    label="Ensemble" if key == ENSEMBLE_KEY else key)
        ax.plot([0, 1], [0, 1], "k--", linewidth=0.8, label="random")
        ax.set_xlabel("False Positive rate")
        ax.set_ylabel("True Positive rate")
        ax.set_title("ROC (final iteration)")
        ax.legend(fontsize="small")
        fig.tight_layout()
        roc_path = os.path.join(out_dir, f"{basename}_roc.png")
        fig.savefig(roc_path, dpi=120)
        plt.close(fig)
        paths.append(roc_path)
    return paths
