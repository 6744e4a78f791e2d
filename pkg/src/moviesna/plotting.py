"""PNG figures written next to the delimited reports (headless backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

BUCKET_LABELS = ("0-3", "4-5", "6-7", "8-10")
_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return path


def rating_histogram(histogram, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(np.arange(len(histogram)) + 0.5, histogram, width=0.9, color="#4c72b0")
    ax.set_xticks(range(len(histogram) + 1))
    ax.set_xlabel("IMDb rating")
    ax.set_ylabel("titles")
    return _save(fig, path)


def degree_ccdf(degrees, path, slope=None):
    deg = np.asarray([d for d in degrees if d > 0], float)
    values = np.unique(deg)
    ccdf = np.array([(deg >= v).mean() for v in values])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(values, ccdf, "o", ms=3)
    ax.set_xlabel("degree")
    ax.set_ylabel("P(D >= d)")
    if slope is not None:
        ax.set_title(f"tail slope {slope:.2f}")
    return _save(fig, path)


def grid_heatmap(p_list, q_list, acc, path):
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(acc, cmap="viridis", origin="lower")
    ax.set_xticks(range(len(q_list)), [f"{q:g}" for q in q_list])
    ax.set_yticks(range(len(p_list)), [f"{p:g}" for p in p_list])
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    for i in range(len(p_list)):
        for j in range(len(q_list)):
            ax.text(j, i, f"{acc[i, j]:.3f}", ha="center", va="center", color="w", fontsize=8)
    fig.colorbar(im, ax=ax, label="test accuracy")
    return _save(fig, path)


def comparison_bars(kinds, acc, path):
    x = np.arange(len(kinds))
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(x - 0.2, acc[:, 0], 0.4, label="without SNA")
    ax.bar(x + 0.2, acc[:, 1], 0.4, label="with SNA")
    ax.set_xticks(x, kinds)
    ax.set_ylabel("test accuracy")
    ax.set_ylim(0, 1)
    ax.legend()
    return _save(fig, path)


def confusion_heatmap(cm, path):
    fig, ax = plt.subplots(figsize=(4.5, 4))
    ax.imshow(cm, cmap="Blues")
    ax.set_xticks(range(len(BUCKET_LABELS)), BUCKET_LABELS)
    ax.set_yticks(range(len(BUCKET_LABELS)), BUCKET_LABELS)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    for i in range(cm.shape[0]):
        for j in range(cm.shape[1]):
            ax.text(j, i, str(int(cm[i, j])), ha="center", va="center", fontsize=8)
    return _save(fig, path)


def importance_bars(groups, values, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    y = np.arange(len(groups))
    ax.barh(y, values, color="#55a868")
    ax.set_yticks(y, groups)
    ax.invert_yaxis()
    ax.axvline(0, color="k", lw=0.8)
    ax.set_xlabel("accuracy drop when permuted")
    return _save(fig, path)


def class_shares(labels, columns, path):
    """``columns`` maps a series name to its per-bucket shares."""
    x = np.arange(len(labels))
    width = 0.8 / max(len(columns), 1)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for k, (name, shares) in enumerate(columns.items()):
        ax.bar(x + (k - (len(columns) - 1) / 2) * width, shares, width, label=name)
    ax.set_xticks(x, labels)
    ax.set_ylabel("share of titles")
    ax.legend()
    return _save(fig, path)
