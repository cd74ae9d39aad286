"""Matplotlib figures written next to the delimited reports."""

import matplotlib

matplotlib.use("Agg")  # headless; also keeps output byte-deterministic

import matplotlib.pyplot as plt

from .metrics import METRIC_NAMES


def plot_metric_bars(aggregates, path, metric="bleu_4"):
    """Bar chart of one metric per system with fold-std error bars.

    ``aggregates``: {system: {metric: (mean, std)}}.
    """
    systems = list(aggregates)
    means = [aggregates[s][metric][0] * 100 for s in systems]
    stds = [aggregates[s][metric][1] * 100 for s in systems]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(systems)), 3.2))
    ax.bar(range(len(systems)), means, yerr=stds, capsize=4, color="#4878d0")
    ax.set_xticks(range(len(systems)))
    ax.set_xticklabels(systems, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(f"{metric} x100")
    ax.set_title(f"{metric} by system (mean over folds)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_all_metrics(aggregates, path):
    """2x3 grid, one panel per metric."""
    systems = list(aggregates)
    fig, axes = plt.subplots(2, 3, figsize=(11, 6), sharex=True)
    for ax, metric in zip(axes.ravel(), METRIC_NAMES):
        means = [aggregates[s][metric][0] * 100 for s in systems]
        stds = [aggregates[s][metric][1] * 100 for s in systems]
        ax.bar(range(len(systems)), means, yerr=stds, capsize=3, color="#6acc64")
        ax.set_title(metric, fontsize=9)
        ax.set_xticks(range(len(systems)))
        ax.set_xticklabels(systems, rotation=60, ha="right", fontsize=7)
    fig.suptitle("evaluation metrics by system (x100)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_loss_curves(histories, path):
    """Training/validation loss per epoch; one panel per (system, fold).

    ``histories``: {label: list of EpochStats}.
    """
    n = max(len(histories), 1)
    cols = min(n, 3)
    rows = (n + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(4 * cols, 2.8 * rows), squeeze=False)
    for ax, (label, history) in zip(axes.ravel(), sorted(histories.items())):
        epochs = [h.epoch for h in history]
        ax.plot(epochs, [h.train_loss for h in history], label="train", color="#d65f5f")
        valid = [(h.epoch, h.valid_loss) for h in history if h.valid_loss is not None]
        if valid:
            ax.plot([e for e, _ in valid], [v for _, v in valid],
                    label="valid", color="#4878d0")
        ax.set_title(label, fontsize=9)
        ax.set_xlabel("epoch", fontsize=8)
        ax.set_ylabel("loss", fontsize=8)
        ax.legend(fontsize=7)
    for ax in axes.ravel()[len(histories):]:
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
