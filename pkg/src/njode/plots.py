"""Figure rendering for run artifacts.

Reads the CSV files a training run leaves behind and turns them into PNG
files next to them.  Everything draws through the Agg backend so rendering
works headless.
"""

from __future__ import annotations

import csv
import glob
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _read_metrics(path):
    epochs, train_loss, metric = [], [], []
    with open(path) as fh:
        next(fh)  # header
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            e, tl, m = line.split(",")
            if m:
                epochs.append(int(e))
                metric.append(float(m))
            if tl:
                train_loss.append((int(e), float(tl)))
    return epochs, train_loss, metric


def plot_metrics(metrics_csv: str, out_png: str) -> str:
    """Training loss and evaluation metric over epochs, metric on log scale."""
    epochs, train_loss, metric = _read_metrics(metrics_csv)
    fig, ax = plt.subplots(figsize=(7, 4))
    if metric:
        ax.plot(epochs, metric, marker="o", ms=3, color="tab:blue", label="eval metric")
        ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("eval metric", color="tab:blue")
    if train_loss:
        e2, tl = zip(*train_loss)
        ax2 = ax.twinx()
        ax2.plot(e2, tl, color="tab:orange", alpha=0.7, label="train loss")
        ax2.set_ylabel("train loss", color="tab:orange")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return out_png


def plot_trajectory(traj_csv: str, out_png: str) -> str:
    """One test sample: truth, reference, model output and observations."""
    with open(traj_csv) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(x) for x in r] for r in reader])
    d = (len(header) - 1) // 4
    t = rows[:, 0]
    fig, axes = plt.subplots(d, 1, figsize=(7, 2.6 * d), sharex=True, squeeze=False)
    for j in range(d):
        ax = axes[j, 0]
        truth = rows[:, 1 + 4 * j]
        obs = rows[:, 2 + 4 * j].astype(bool)
        ref = rows[:, 3 + 4 * j]
        model = rows[:, 4 + 4 * j]
        ax.plot(t, truth, color="0.6", lw=1, label="true path")
        ax.plot(t, ref, color="tab:green", ls="--", lw=1.2, label="reference")
        ax.plot(t, model, color="tab:blue", lw=1.2, label="model")
        ax.plot(t[obs], truth[obs], "k.", ms=5, label="observed")
        ax.set_ylabel(f"coordinate {j}")
        if j == 0:
            ax.legend(loc="best", fontsize=8)
    axes[-1, 0].set_xlabel("t")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return out_png


def render_run(out_dir: str) -> list:
    """Render every figure a finished run supports; returns the PNG paths."""
    fig_dir = os.path.join(out_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    made = []
    metrics = os.path.join(out_dir, "metrics.csv")
    if os.path.exists(metrics):
        made.append(plot_metrics(metrics, os.path.join(fig_dir, "metrics.png")))
    for traj in sorted(glob.glob(os.path.join(out_dir, "trajectories", "*.csv"))):
        stem = os.path.splitext(os.path.basename(traj))[0]
        made.append(plot_trajectory(traj, os.path.join(fig_dir, stem + ".png")))
    return made


def plot_comparison(run_dirs: dict, out_png: str) -> str:
    """Overlay the eval-metric curves of several runs, one per label."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, run_dir in run_dirs.items():
        metrics = os.path.join(run_dir, "metrics.csv")
        if not os.path.exists(metrics):
            continue
        epochs, _, metric = _read_metrics(metrics)
        if metric:
            ax.plot(epochs, metric, marker="o", ms=3, label=label)
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("eval metric")
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return out_png
