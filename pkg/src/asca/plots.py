"""Figure rendering for the report path: confusion heatmaps, accuracy bars,
and averaged-spectrum plots. Files only; no interactive backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def confusion_figure(report, title: str, path) -> Path:
    """Row-normalized confusion heatmap with counts annotated."""
    conf = np.asarray(report.confusion, dtype=np.float64)
    row_sums = conf.sum(axis=1, keepdims=True)
    shares = np.divide(conf, row_sums, out=np.zeros_like(conf), where=row_sums > 0)

    n = len(report.label_names)
    fig, ax = plt.subplots(figsize=(1.0 + 0.7 * n, 1.0 + 0.7 * n))
    ax.imshow(shares, cmap="Blues", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(n), report.label_names, rotation=45, ha="right")
    ax.set_yticks(range(n), report.label_names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(f"{title} (accuracy {report.accuracy:.0%})")
    for i in range(n):
        for j in range(n):
            if conf[i, j]:
                color = "white" if shares[i, j] > 0.5 else "black"
                ax.text(j, i, int(conf[i, j]), ha="center", va="center", color=color)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def accuracy_figure(results, path) -> Path:
    """Grouped bars: accuracy per classifier at each axis value."""
    values = []
    for r in results:
        if r.axis_value not in values:
            values.append(r.axis_value)
    kinds = []
    for r in results:
        if r.classifier not in kinds:
            kinds.append(r.classifier)
    acc = np.zeros((len(kinds), len(values)))
    for r in results:
        acc[kinds.index(r.classifier), values.index(r.axis_value)] = r.report.accuracy

    fig, ax = plt.subplots(figsize=(2.0 + 1.2 * len(values), 4.0))
    width = 0.8 / len(kinds)
    x = np.arange(len(values))
    for ki, kind in enumerate(kinds):
        ax.bar(x + ki * width, acc[ki], width, label=kind.upper())
    ax.set_xticks(
        x + 0.4 - width / 2,
        [results[0].axis if v is None else f"{v:g}" for v in values],
    )
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("validation accuracy")
    ax.set_xlabel(results[0].axis)
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def spectrum_figure(report, path, title: str = "averaged spectrum peaks") -> Path:
    """Stem plot of reported peaks over frequency."""
    fig, ax = plt.subplots(figsize=(7, 4))
    if report.peaks:
        freqs = [p[0] for p in report.peaks]
        powers = [p[1] for p in report.peaks]
        ax.stem(freqs, powers)
        for f, p in report.peaks:
            ax.annotate(f"{f:.0f} Hz", (f, p), textcoords="offset points", xytext=(3, 3))
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("power (dB)")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_report_figures(results, out_dir) -> list[Path]:
    """One confusion heatmap per result plus an accuracy summary chart."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for r in results:
        tag = r.axis if r.axis_value is None else f"{r.axis}_{r.axis_value:g}"
        name = f"confusion_{tag}_{r.classifier}.png"
        title = f"{tag} / {r.classifier.upper()}"
        written.append(confusion_figure(r.report, title, out_dir / name))
    written.append(accuracy_figure(results, out_dir / "accuracy_by_axis.png"))
    return written
