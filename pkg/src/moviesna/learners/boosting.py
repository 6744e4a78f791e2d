"""Multiclass gradient-boosted trees with softmax cross-entropy."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import log_softmax, softmax

from ._kernels import build_hist_tree
from .base import TrainedModel, check_training_data


@dataclass(frozen=True)
class BoostParams:
    depth: int = 5
    learning_rate: float = 0.05
    l2_leaf_reg: float = 1.0
    n_iterations: int = 300
    max_bins: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.l2_leaf_reg < 0:
            raise ValueError("l2_leaf_reg must be >= 0")
        if self.n_iterations < 0:
            raise ValueError("n_iterations must be >= 0")
        if not 2 <= self.max_bins <= 256:
            raise ValueError("max_bins must lie in [2, 256]")


def bin_borders(x, max_bins=64):
    """Split candidates for one feature.

    All midpoints between consecutive distinct values when there are at most
    ``max_bins`` of them, otherwise midpoints just above ``max_bins - 1``
    quantiles.
    """
    u = np.unique(x)
    if len(u) <= max_bins:
        return 0.5 * (u[:-1] + u[1:])
    q = np.quantile(x, np.arange(1, max_bins) / max_bins, method="lower")
    q = np.unique(q)
    pos = np.searchsorted(u, q)
    pos = pos[pos < len(u) - 1]
    return 0.5 * (u[pos] + u[pos + 1])


def apply_binned(X, borders):
    out = np.empty(X.shape, dtype=np.uint8)
    for j, b in enumerate(borders):
        out[:, j] = np.searchsorted(b, X[:, j], side="left")
    return out


def heap_leaves(X, split_f, split_thr, depth):
    """Final heap node of each row in a depth-limited tree (-1 feature = leaf)."""
    node = np.zeros(len(X), dtype=np.int64)
    rows = np.arange(len(X))
    for _ in range(depth):
        f = split_f[node]
        live = f >= 0
        if not live.any():
            break
        go_right = np.zeros(len(X), bool)
        go_right[live] = X[rows[live], f[live]] > split_thr[node[live]]
        node = np.where(live, 2 * node + 1 + go_right, node)
    return node


def cross_entropy(raw, y):
    return float(-log_softmax(raw, axis=1)[np.arange(len(y)), y].mean())


class BoostModel(TrainedModel):
    kind = "gb"

    def raw_scores(self, X):
        a = self.arrays
        depth = int(self.params["depth"])
        F = np.tile(a["init"], (len(X), 1))
        n_iter, k, _ = a["split_feature"].shape
        for t in range(n_iter):
            for c in range(k):
                leaves = heap_leaves(X, a["split_feature"][t, c], a["threshold"][t, c], depth)
                F[:, c] += a["value"][t, c][leaves]
        return F

    def _proba(self, X):
        return softmax(self.raw_scores(X), axis=1)

    @property
    def train_loss(self):
        return self.arrays["train_loss"]


def train_gb(X, y, params: BoostParams = BoostParams(), n_classes=None) -> BoostModel:
    """K-class boosting: per iteration one Newton tree per class on residual y - p.

    Leaves hold ``learning_rate * sum(y - p) / (sum p(1 - p) + l2_leaf_reg)``;
    raw scores start at the log class priors.
    """
    X, y, k = check_training_data(X, y, n_classes)
    n = len(y)
    borders = [bin_borders(X[:, j], params.max_bins) for j in range(X.shape[1])]
    n_bins = max(len(b) for b in borders) + 1
    Xb = apply_binned(X, borders)
    prior = np.bincount(y, minlength=k) / n
    init = np.log(np.maximum(prior, 1e-12))
    Y = np.eye(k)[y]
    F = np.tile(init, (n, 1))
    size = 2 ** (params.depth + 1) - 1
    T = params.n_iterations
    split_feature = np.full((T, k, size), -1, np.int64)
    threshold = np.zeros((T, k, size))
    value = np.zeros((T, k, size))
    losses = [cross_entropy(F, y)]
    for t in range(T):
        P = softmax(F, axis=1)
        step = np.zeros_like(F)
        for c in range(k):
            g = P[:, c] - Y[:, c]
            h = P[:, c] * (1.0 - P[:, c])
            sf, sb, val = build_hist_tree(Xb, n_bins, g, h, params.depth, params.l2_leaf_reg, 1)
            thr = np.zeros(size)
            for node in np.flatnonzero(sf >= 0):
                thr[node] = borders[sf[node]][sb[node]]
            split_feature[t, c] = sf
            threshold[t, c] = thr
            value[t, c] = params.learning_rate * val
            leaves = heap_leaves(X, sf, thr, params.depth)
            step[:, c] = value[t, c][leaves]
        F += step
        losses.append(cross_entropy(F, y))
    arrays = dict(init=init, split_feature=split_feature, threshold=threshold, value=value,
                  train_loss=np.array(losses))
    return BoostModel(asdict(params), arrays, X.shape[1], k)
