"""Synthetic minority oversampling by interpolation between same-class neighbours."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")


@dataclass
class SmoteResult:
    X: np.ndarray
    y: np.ndarray
    # per synthetic row (aligned with X[n_original:]): parent and neighbour row indices, lambda
    parents: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), int))
    lambdas: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_original: int = 0
    k_used: dict = field(default_factory=dict)   # class -> effective k, where clamped


def smote_balance(X, y, config: SmoteConfig = SmoteConfig(), provenance=False):
    """Upsample every class to the majority count.

    Originals come first and unchanged; synthetic rows follow, class by class
    in ascending label order.  Each synthetic row is ``x + lam * (nn - x)`` for
    a random class member ``x``, one of its ``k`` nearest same-class
    neighbours ``nn`` and ``lam ~ U[0, 1]``.  When a class has ``k`` or fewer
    members, ``k`` is clamped to ``size - 1`` for that class.

    Returns ``(X', y')``, or a ``SmoteResult`` with parent indices when
    ``provenance`` is set.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one row per label")
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) == 0:
        raise ValueError("empty input")
    small = classes[counts < 2]
    if len(small):
        raise ValueError(f"class {small[0]} has fewer than 2 samples; cannot interpolate")
    target = counts.max()
    rng = np.random.default_rng(config.seed)
    new_x, new_y, parents, lams, k_used = [], [], [], [], {}
    for cls, cnt in zip(classes, counts):
        need = target - cnt
        if need == 0:
            continue
        members = np.flatnonzero(y == cls)
        k = min(config.k_neighbors, cnt - 1)
        if k < config.k_neighbors:
            k_used[cls.item()] = int(k)
        pts = X[members]
        # query k+1 and drop self; duplicates of a point may come back in any order
        _, nn = cKDTree(pts).query(pts, k=k + 1)
        nn = nn.reshape(len(pts), k + 1)
        neigh = np.empty((len(pts), k), dtype=int)
        for i in range(len(pts)):
            row = [j for j in nn[i] if j != i][:k]
            neigh[i] = row
        base = rng.integers(0, cnt, size=need)
        pick = rng.integers(0, k, size=need)
        lam = rng.random(need)
        other = neigh[base, pick]
        synth = pts[base] + lam[:, None] * (pts[other] - pts[base])
        new_x.append(synth)
        new_y.append(np.full(need, cls, dtype=y.dtype))
        parents.append(np.column_stack([members[base], members[other]]))
        lams.append(lam)
    if new_x:
        Xo = np.vstack([X, *new_x])
        yo = np.concatenate([y, *new_y])
        par = np.vstack(parents)
        lam = np.concatenate(lams)
    else:
        Xo, yo = X.copy(), y.copy()
        par, lam = np.zeros((0, 2), int), np.zeros(0)
    if provenance:
        return SmoteResult(Xo, yo, par, lam, len(X), k_used)
    return Xo, yo
