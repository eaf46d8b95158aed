"""Figure rendering for campaign reports.

Every report command renders its figures to PNG files next to the delimited
output, using the non-interactive Agg backend.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_ecdfs(path, samples: dict, reference=None, ref_label="limit",
               xlabel="scaled value"):
    """Overlay empirical CDFs, optionally against a reference curve."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in samples.items():
        v = np.sort(np.asarray(values, dtype=float))
        ax.step(v, np.arange(1, v.size + 1) / v.size, where="post", label=label)
    if reference is not None:
        xs, ys = reference
        ax.plot(xs, ys, "k--", lw=1.2, label=ref_label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("CDF")
    ax.legend(frameon=False)
    return _finish(fig, path)


def plot_surface(path, xs, ys, h):
    """Filled-contour rendering of the limiting height surface."""
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    m = ax.contourf(xs, ys, h.T, levels=21, cmap="viridis")
    ax.contour(xs, ys, h.T, levels=[0.5], colors="w", linewidths=0.8)
    fig.colorbar(m, ax=ax, label="height")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    return _finish(fig, path)


def plot_density_comparison(path, mids, empirical: dict, predicted: dict):
    """Per-line histogram densities against the kernel prediction."""
    lines = sorted(predicted)
    fig, axes = plt.subplots(1, len(lines), figsize=(3.1 * len(lines), 3.2),
                             sharey=True, squeeze=False)
    for ax, l in zip(axes[0], lines):
        ax.bar(mids, empirical[l], width=mids[1] - mids[0], alpha=0.45,
               label="MC")
        ax.plot(mids, predicted[l], "r-", lw=1.3, label="kernel")
        ax.set_title(f"line {l}")
        ax.set_xlabel("u")
    axes[0][0].set_ylabel("density")
    axes[0][0].legend(frameon=False)
    return _finish(fig, path)


def plot_curve(path, xs, ys, xlabel, ylabel):
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.plot(xs, ys, "b-")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def plot_heights(path, heights):
    """Heat map of a single sampled configuration."""
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    m = ax.imshow(np.asarray(heights).T, origin="lower", cmap="viridis")
    fig.colorbar(m, ax=ax, label="height")
    ax.set_xlabel("i")
    ax.set_ylabel("j")
    return _finish(fig, path)
