"""Gini CART classifier and random forest."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from ._kernels import apply_tree, build_cart
from .base import TrainedModel, check_training_data


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 300
    max_features: Union[str, float, int] = "auto"
    criterion: str = "gini"
    min_samples_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.criterion != "gini":
            raise ValueError(f"unsupported criterion {self.criterion!r}")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        resolve_max_features(self.max_features, 1)


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 250
    tree: TreeParams = field(default_factory=TreeParams)
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")


def resolve_max_features(mf, n_features):
    if mf in ("auto", "sqrt"):
        return max(1, int(np.sqrt(n_features)))
    if mf == "all":
        return n_features
    if isinstance(mf, bool) or not isinstance(mf, (int, float)):
        raise ValueError(f"max_features must be auto, all, a fraction or a count, got {mf!r}")
    if isinstance(mf, float):
        if not 0 < mf <= 1:
            raise ValueError("fractional max_features must lie in (0, 1]")
        return max(1, int(mf * n_features))
    if mf < 1:
        raise ValueError("max_features count must be >= 1")
    return min(int(mf), n_features)


def gini(counts):
    """Gini impurity 1 - sum(p_i^2) of a class-count vector."""
    c = np.asarray(counts, dtype=float)
    total = c.sum()
    if total == 0:
        raise ValueError("empty node")
    p = c / total
    return float(1.0 - np.sum(p * p))


def _flat_params(params: TreeParams, prefix=""):
    return {prefix + k: v for k, v in asdict(params).items()}


class TreeModel(TrainedModel):
    kind = "tree"

    def leaf_index(self, X):
        a = self.arrays
        return apply_tree(self._check(X), a["feature"], a["threshold"], a["left"], a["right"])

    def _proba(self, X):
        a = self.arrays
        leaves = apply_tree(X, a["feature"], a["threshold"], a["left"], a["right"])
        return a["value"][leaves]

    @property
    def depth(self):
        a = self.arrays
        depth = np.zeros(len(a["feature"]), int)
        for node in range(len(a["feature"])):
            if a["feature"][node] >= 0:
                depth[a["left"][node]] = depth[node] + 1
                depth[a["right"][node]] = depth[node] + 1
        return int(depth.max())


class ForestModel(TrainedModel):
    kind = "forest"

    def _proba(self, X):
        a = self.arrays
        off = a["offsets"]
        total = np.zeros((len(X), self.n_classes))
        for t in range(len(off) - 1):
            s, e = off[t], off[t + 1]
            leaves = apply_tree(X, a["feature"][s:e], a["threshold"][s:e], a["left"][s:e],
                                a["right"][s:e])
            total += a["value"][s:e][leaves]
        return total / (len(off) - 1)


def _grow(X, y, rows, k, params: TreeParams, seed):
    mf = resolve_max_features(params.max_features, X.shape[1])
    return build_cart(X, y, rows.astype(np.int64), k, params.max_depth, params.min_samples_leaf,
                      mf, seed)


def train_tree(X, y, params: TreeParams = TreeParams(), n_classes=None) -> TreeModel:
    """Greedy gini CART; leaves hold class distributions."""
    X, y, k = check_training_data(X, y, n_classes)
    seed = int(np.random.default_rng(params.seed).integers(2 ** 31))
    feat, thr, left, right, value = _grow(X, y, np.arange(len(y)), k, params, seed)
    arrays = dict(feature=feat, threshold=thr, left=left, right=right, value=value)
    return TreeModel(_flat_params(params), arrays, X.shape[1], k)


def train_forest(X, y, params: ForestParams = ForestParams(), n_classes=None) -> ForestModel:
    """Trees on bootstrap resamples; probabilities average the leaf distributions."""
    X, y, k = check_training_data(X, y, n_classes)
    rng = np.random.default_rng(params.seed)
    n = len(y)
    parts = []
    for _ in range(params.n_estimators):
        rows = rng.integers(0, n, size=n) if params.bootstrap else np.arange(n)
        tree_seed = int(rng.integers(2 ** 31))
        parts.append(_grow(X, y, rows, k, params.tree, tree_seed))
    sizes = [len(p[0]) for p in parts]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    arrays = dict(
        offsets=offsets,
        feature=np.concatenate([p[0] for p in parts]),
        threshold=np.concatenate([p[1] for p in parts]),
        left=np.concatenate([p[2] for p in parts]),
        right=np.concatenate([p[3] for p in parts]),
        value=np.vstack([p[4] for p in parts]),
    )
    flat = dict(n_estimators=params.n_estimators, bootstrap=params.bootstrap, seed=params.seed)
    flat.update(_flat_params(params.tree, "tree_"))
    return ForestModel(flat, arrays, X.shape[1], k)
