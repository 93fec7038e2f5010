"""Report figures: training curves, confusion matrices, label counts.

All functions draw on the non-interactive Agg backend and write straight to a
file, returning its path.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

GOLDEN = (math.sqrt(5) - 1.0) / 2.0

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 11,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.bbox": "tight",
    # stable bytes across runs
    "svg.hashsalt": "tweetinfo",
}


def figsize(width=6.0, ratio=GOLDEN):
    return (width, width * ratio)


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=150, metadata={"Software": None} if path.suffix == ".png" else None)
    plt.close(fig)
    return path


def plot_training_curves(history: dict, path, best=None) -> Path:
    """Train loss and dev F1 per epoch, one line per learning rate.

    ``history`` maps lr to a list of epoch records; ``best`` is an optional
    ``(lr, epoch)`` pair to highlight.
    """
    with plt.rc_context(STYLE):
        fig, (ax_loss, ax_f1) = plt.subplots(1, 2, figsize=figsize(9.0, 0.4))
        for lr, records in sorted(history.items()):
            epochs = [r.epoch for r in records]
            ax_loss.plot(epochs, [max(r.train_loss, 1e-12) for r in records], marker="o", ms=2, label=f"lr={lr:g}")
            ax_f1.plot(epochs, [r.dev_f1 for r in records], marker="o", ms=2, label=f"lr={lr:g}")
        if best is not None:
            lr, epoch = best
            f1 = next(r.dev_f1 for r in history[lr] if r.epoch == epoch)
            ax_f1.scatter([epoch], [f1], s=60, facecolors="none", edgecolors="k", zorder=5, label="selected")
        ax_loss.set_yscale("log")
        ax_loss.set_xlabel("epoch")
        ax_loss.set_ylabel("train loss (BCE)")
        ax_f1.set_xlabel("epoch")
        ax_f1.set_ylabel("dev F1")
        ax_f1.set_ylim(0, 1.02)
        ax_f1.legend(loc="lower right")
        return _save(fig, path)


def plot_confusion(report, path, title=None) -> Path:
    counts = [[report.tn, report.fp], [report.fn, report.tp]]
    names = ["UNINFORMATIVE", "INFORMATIVE"]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize(4.0, 0.9))
        ax.imshow(counts, cmap="Blues")
        peak = max(max(row) for row in counts) or 1
        for i in range(2):
            for j in range(2):
                ax.text(j, i, str(counts[i][j]), ha="center", va="center",
                        color="white" if counts[i][j] > peak / 2 else "black")
        ax.set_xticks([0, 1], names)
        ax.set_yticks([0, 1], names)
        ax.set_xlabel("predicted")
        ax.set_ylabel("gold")
        ax.set_title(title or report.render())
        return _save(fig, path)


def plot_label_counts(stats: dict, path) -> Path:
    """Grouped bars of per-label counts; ``stats`` maps split name to CorpusStats."""
    from tweetinfo.corpus import Label

    names = list(stats)
    width = 0.38
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize(5.0))
        for k, label in enumerate((Label.INFORMATIVE, Label.UNINFORMATIVE)):
            xs = [i + (k - 0.5) * width for i in range(len(names))]
            ax.bar(xs, [stats[n][label] for n in names], width, label=label.name.lower())
        ax.set_xticks(range(len(names)), names)
        ax.set_ylabel("tweets")
        ax.legend()
        return _save(fig, path)
