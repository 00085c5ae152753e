"""Figure rendering for CLI reports.

Each saver mirrors one delimited output: the training curve CSV, the
loss-comparison CSV, and the repeated-runs CSV. Figures are written next
to the data files; the CSV stays the canonical record.
"""

from typing import Dict, List, Sequence, Tuple


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_curve_figure(trace: Sequence[Tuple[int, float, float]], path) -> None:
    """Validation RMSE and MAE per epoch."""
    plt = _pyplot()
    epochs = [row[0] for row in trace]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(epochs, [row[1] for row in trace], label="val RMSE")
    ax.plot(epochs, [row[2] for row in trace], label="val MAE")
    ax.set_xlabel("epoch")
    ax.set_ylabel("validation error")
    ax.set_yscale("log")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_compare_figure(rows: List[Dict], path) -> None:
    """Grouped bars: test accuracy and time-to-best per loss."""
    plt = _pyplot()
    losses = [r["loss"] for r in rows]
    x = range(len(losses))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    w = 0.35
    ax1.bar([i - w / 2 for i in x], [r["test_rmse"] for r in rows], w, label="RMSE")
    ax1.bar([i + w / 2 for i in x], [r["test_mae"] for r in rows], w, label="MAE")
    ax1.set_xticks(list(x), losses)
    ax1.set_ylabel("test error")
    ax1.legend()
    ax2.bar([i - w / 2 for i in x], [r["time_rmse_s"] for r in rows], w, label="time to best RMSE")
    ax2.bar([i + w / 2 for i in x], [r["time_mae_s"] for r in rows], w, label="time to best MAE")
    ax2.set_xticks(list(x), losses)
    ax2.set_ylabel("seconds")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_repeat_figure(rmse_vals: Sequence[float], mae_vals: Sequence[float], path) -> None:
    """Mean with std error bars over repeated runs."""
    import numpy as np

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    means = [float(np.mean(rmse_vals)), float(np.mean(mae_vals))]
    stds = [float(np.std(rmse_vals)), float(np.std(mae_vals))]
    ax.bar([0, 1], means, yerr=stds, capsize=6, color=["tab:blue", "tab:orange"])
    ax.set_xticks([0, 1], ["test RMSE", "test MAE"])
    ax.set_ylabel("error (mean over runs, std bars)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
