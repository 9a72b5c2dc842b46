"""Figure generation: accuracy curves and training-score/loss curves."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics_io import RunSeries, read_metrics

FORMATS = ("png", "svg")


@dataclass(frozen=True)
class FigureRequest:
    metrics_paths: Sequence[str]
    out_dir: str
    image_format: str = "png"

    def __post_init__(self):
        if not self.metrics_paths:
            raise ValueError("at least one metrics file is required")
        if self.image_format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")


def _plot_accuracy(run: RunSeries, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name in sorted(run.clients):
        series = run.clients[name]
        ax.plot(series.epochs, series.test_acc, marker="o", markersize=3,
                linewidth=1.2, label=name)
    if run.global_series.epochs:
        ax.plot(run.global_series.epochs, run.global_series.test_acc,
                color="black", linewidth=2.5, marker="s", markersize=4,
                label="global")
    ax.set_xlabel("epoch")
    ax.set_ylabel("top-1 accuracy")
    ax.set_title(f"{run.label}: test accuracy per epoch")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _plot_training(run: RunSeries, path: Path) -> None:
    fig, (ax_acc, ax_loss) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for name in sorted(run.clients):
        series = run.clients[name]
        ax_acc.plot(series.epochs, series.train_acc, marker="o",
                    markersize=3, linewidth=1.2, label=name)
        ax_loss.plot(series.epochs, series.train_loss, marker="o",
                     markersize=3, linewidth=1.2, label=name)
    ax_acc.set_ylabel("training accuracy")
    ax_acc.grid(True, alpha=0.3)
    ax_acc.legend()
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("training loss")
    ax_loss.grid(True, alpha=0.3)
    fig.suptitle(f"{run.label}: client training curves")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render(request: FigureRequest) -> list[Path]:
    """Write two figures per metrics file; returns the paths written.

    Inputs are never modified; identical inputs yield the same set of
    output filenames (``<label>_accuracy`` and ``<label>_trainloss``).
    """
    out_dir = Path(request.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for metrics_path in request.metrics_paths:
        run = read_metrics(metrics_path)
        accuracy_path = out_dir / f"{run.label}_accuracy.{request.image_format}"
        training_path = out_dir / f"{run.label}_trainloss.{request.image_format}"
        _plot_accuracy(run, accuracy_path)
        _plot_training(run, training_path)
        written.extend([accuracy_path, training_path])
    return written
