"""Figure and delimited-output rendering for training runs and FID reports."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import imageio
from .fid.evaluate import FidReport, compare_reports


def save_fid_figure(reports: list[FidReport], path: str | Path) -> Path:
    """Horizontal bar chart of FID scores, best (lowest) on top."""
    ranked = compare_reports(reports)
    labels = [f"{r.model_id} [{r.scope}]" for r in ranked]
    scores = [r.score for r in ranked]
    fig, ax = plt.subplots(figsize=(7, 0.5 * len(ranked) + 1.5))
    ypos = np.arange(len(ranked))[::-1]
    ax.barh(ypos, scores, color="#4878a8")
    ax.set_yticks(ypos)
    ax.set_yticklabels(labels)
    ax.set_xlabel(f"FID ({ranked[0].extractor_id})" if ranked else "FID")
    ax.set_title("Model comparison (lower is better)")
    for y, s in zip(ypos, scores):
        ax.text(s, y, f" {s:.2f}", va="center", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_training_curves(metrics: list[dict] | str | Path, path: str | Path) -> Path:
    """Loss and augmentation-probability curves from a metrics log."""
    if not isinstance(metrics, list):
        with open(metrics) as f:
            metrics = [json.loads(line) for line in f if line.strip()]
    if not metrics:
        raise ValueError("no metrics records to plot")
    steps = [m["step"] for m in metrics]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax1.plot(steps, [m["d_loss"] for m in metrics], label="d_loss", lw=1)
    ax1.plot(steps, [m["g_loss"] for m in metrics], label="g_loss", lw=1)
    ax1.set_ylabel("loss")
    ax1.legend(loc="best")
    ax1.set_title("Training losses")
    ax2.plot(steps, [m.get("rt", 0.0) for m in metrics], label="rt", lw=1, color="#888")
    ax2.plot(steps, [m.get("p", 0.0) for m in metrics], label="aug p", lw=1.5, color="#c44")
    ax2.set_xlabel("step")
    ax2.set_ylabel("signal")
    ax2.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_metrics_csv(metrics: list[dict], path: str | Path) -> Path:
    keys: list[str] = []
    for m in metrics:
        for k in m:
            if k not in keys:
                keys.append(k)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=keys)
        writer.writeheader()
        writer.writerows(metrics)
    return Path(path)


def save_image_grid(images: np.ndarray, path: str | Path, ncols: int = 4) -> Path:
    """Tile an N x C x H x W batch into one PNG."""
    images = np.asarray(images)
    n, c, h, w = images.shape
    ncols = min(ncols, n)
    nrows = int(np.ceil(n / ncols))
    grid = np.ones((c, nrows * h, ncols * w), dtype=np.float32)
    for i in range(n):
        r, col = divmod(i, ncols)
        grid[:, r * h : (r + 1) * h, col * w : (col + 1) * w] = images[i]
    Path(path).write_bytes(imageio.encode_png(grid))
    return Path(path)


def save_projection_trace(trace: list[float], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(trace, lw=1.2)
    ax.set_xlabel("step")
    ax.set_ylabel("best-so-far loss")
    ax.set_title("Latent projection")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
