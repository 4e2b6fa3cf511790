"""Companion figures for experiment reports.

Each experiment's CSV gets one PNG rendered next to it (same stem). The
figures restate the CSV numbers; nothing downstream reads them back.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "companion_path",
    "render_classify",
    "render_logreg",
    "render_separation",
    "render_audit",
]

_COLORS = {"global": "#4878cf", "per-coord": "#d65f5f", "pa": "#6acc65",
           "global-best-fixed": "#4878cf"}


def companion_path(out_path):
    stem, _ = os.path.splitext(out_path)
    return stem + ".png"


def _color(name):
    return _COLORS.get(name, "#888888")


def render_classify(ledgers, path, title=""):
    """Bar panels: average hinge loss and mistake fraction per algorithm."""
    names = [l.algorithm for l in ledgers]
    hinge = [l.avg_hinge_loss for l in ledgers]
    mistakes = [l.mistake_fraction for l in ledgers]
    colors = [_color(n) for n in names]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    ax1.bar(names, hinge, color=colors)
    ax1.set_ylabel("average hinge loss")
    ax2.bar(names, mistakes, color=colors)
    ax2.set_ylabel("mistake fraction")
    for ax in (ax1, ax2):
        ax.grid(axis="y", alpha=0.3)
        ax.set_axisbelow(True)
    fig.suptitle(title or "progressive validation")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_logreg(ledgers, path, title=""):
    """Per-round regret bars for the logistic run."""
    names = [l.algorithm for l in ledgers]
    values = [l.regret_per_round for l in ledgers]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(names, values, color=[_color(n) for n in names])
    ax.set_ylabel("regret per round")
    ax.grid(axis="y", alpha=0.3)
    ax.set_axisbelow(True)
    fig.suptitle(title or "regularized logistic run")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_separation(ledgers, slopes, path):
    """Log-log regret vs horizon for each algorithm, slope in the legend."""
    series = {}
    for ledger in ledgers:
        series.setdefault(ledger.algorithm, []).append((ledger.rounds, ledger.regret))
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for name, pts in series.items():
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [max(p[1], 1e-12) for p in pts]
        label = name
        if name in slopes:
            label = f"{name} (slope {slopes[name]:.2f})"
        ax.loglog(xs, ys, "o-", color=_color(name), label=label)
    ax.set_xlabel("rounds")
    ax.set_ylabel("regret")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.suptitle("adversarial family: tuned constant vs per-coordinate")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_audit(report, path):
    """Scatter of measured regret against its bound for both learners."""
    fig, ax = plt.subplots(figsize=(5, 5))
    hi = 1e-12
    for name, pairs in report.scatter.items():
        if not pairs:
            continue
        bounds = np.array([p[0] for p in pairs])
        regrets = np.array([p[1] for p in pairs])
        ax.scatter(bounds, np.maximum(regrets, 0.0), s=8, alpha=0.5,
                   color=_color(name), label=name)
        hi = max(hi, float(bounds.max()))
    ax.plot([0, hi], [0, hi], "k--", linewidth=1, label="bound = regret")
    ax.set_xlabel("bound value")
    ax.set_ylabel("measured regret (clipped at 0)")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.suptitle(f"bound audit (seed {report.seed})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
