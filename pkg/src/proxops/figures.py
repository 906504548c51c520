"""Matplotlib renders written alongside the delimited report files."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_trajectory_figure(samples, path, title="reference trajectory"):
    """Top-down and out-of-plane views of a sampled reference path."""
    pos = np.array([s.position for s in samples])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(pos[:, 0], pos[:, 1], lw=1.2)
    ax1.plot(pos[0, 0], pos[0, 1], "o", ms=5, label="start")
    ax1.set_xlabel("x [m]")
    ax1.set_ylabel("y [m]")
    ax1.set_aspect("equal", adjustable="datalim")
    ax1.legend(loc="best", fontsize=8)
    t = np.array([s.time for s in samples])
    ax2.plot(t, pos[:, 0], label="x")
    ax2.plot(t, pos[:, 1], label="y")
    ax2.plot(t, pos[:, 2], label="z")
    ax2.set_xlabel("t [s]")
    ax2.set_ylabel("position [m]")
    ax2.legend(fontsize=8)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_rollout_figure(log, path, title="rollout"):
    """Tracked vs reference path, distance error, and thruster activity."""
    t = np.array([s.t for s in log.steps])
    pos = np.array([s.state.position for s in log.steps])
    ref = np.array([s.reference.position for s in log.steps])
    err = np.linalg.norm(ref - pos, axis=1)
    actions = np.array([s.action for s in log.steps])

    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    axes[0].plot(ref[:, 0], ref[:, 1], "k--", lw=1, label="reference")
    axes[0].plot(pos[:, 0], pos[:, 1], lw=1.2, label="spacecraft")
    axes[0].set_xlabel("x [m]")
    axes[0].set_ylabel("y [m]")
    axes[0].set_aspect("equal", adjustable="datalim")
    axes[0].legend(fontsize=8)

    axes[1].plot(t, err)
    axes[1].set_xlabel("t [s]")
    axes[1].set_ylabel("position error [m]")

    im = axes[2].imshow(
        actions.T, aspect="auto", origin="lower", cmap="viridis",
        extent=[t[0], t[-1], 0.5, 8.5], vmin=0.0, vmax=1.0,
    )
    axes[2].set_xlabel("t [s]")
    axes[2].set_ylabel("thruster")
    fig.colorbar(im, ax=axes[2], label="activation")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_training_curve(records, path, title="training"):
    """Mean return with a std band over the evaluation cadence."""
    steps = np.array([r["step"] for r in records])
    mean = np.array([r["mean_return"] for r in records])
    std = np.array([r["std_return"] for r in records])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(steps, mean, "-o", ms=3)
    ax.fill_between(steps, mean - std, mean + std, alpha=0.25)
    ax.set_xlabel("environment steps")
    ax.set_ylabel("mean return")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_eval_figure(summary, path, title="evaluation"):
    """Per-seed returns as a bar chart."""
    fig, ax = plt.subplots(figsize=(5, 4))
    returns = list(summary.returns)
    ax.bar(range(len(returns)), returns)
    ax.axhline(summary.mean_return, color="k", lw=1, ls="--", label="mean")
    ax.set_xlabel("evaluation seed index")
    ax.set_ylabel("return")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
