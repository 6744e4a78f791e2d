"""Experiments: split, balance, train, evaluate, p/q grid, model comparison, importance."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import learners
from .catalog import Catalog
from .features import GROUPS, SNA_GROUPS, Dataset, RatingBucket, assemble, bucket_shares
from .graph import build_graph
from .node2vec import EmbedConfig, EmbeddingTable, WalkConfig, embed_pipeline
from .smote import SmoteConfig, smote_balance

N_CLASSES = len(RatingBucket)
# published bucket shares after the catalog reduction, lowest bucket first
REFERENCE_SHARES = (0.07, 0.35, 0.56, 0.02)


def split_indices(y, ratio=0.8, stratified=True, seed=0):
    """Train/test row indices, both sorted."""
    y = np.asarray(y)
    if not 0 < ratio < 1:
        raise ValueError("split ratio must lie in (0, 1)")
    if len(y) < 2:
        raise ValueError("need at least 2 samples to split")
    rng = np.random.default_rng(seed)
    if not stratified:
        order = rng.permutation(len(y))
        n_train = min(max(int(round(ratio * len(y))), 1), len(y) - 1)
        return np.sort(order[:n_train]), np.sort(order[n_train:])
    train, test = [], []
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        if len(members) < 2:
            raise ValueError(f"class {cls} has {len(members)} sample(s); stratification needs 2")
        members = rng.permutation(members)
        n_train = min(max(int(round(ratio * len(members))), 1), len(members) - 1)
        train.append(members[:n_train])
        test.append(members[n_train:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(dataset: Dataset, ratio=0.8, stratified=True, seed=0):
    tr, te = split_indices(dataset.y, ratio, stratified, seed)
    return dataset.subset(tr), dataset.subset(te)


def accuracy(predicted, actual) -> float:
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise ValueError(f"length mismatch: {predicted.shape} vs {actual.shape}")
    if predicted.size == 0:
        raise ValueError("accuracy of empty input")
    return float(np.mean(predicted == actual))


def confusion_matrix(predicted, actual, n_classes=N_CLASSES):
    """Rows are true classes, columns predicted ones."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(actual), np.asarray(predicted)), 1)
    return cm


def _flatten(obj, prefix=""):
    out = {}
    for k, v in (asdict(obj) if is_dataclass(obj) else obj).items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[prefix + k] = v
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "gb"
    params: object = None            # learner params; None means the family defaults
    with_sna: bool = True
    actor_mode: str = "mean"
    smote: bool = True
    k_neighbors: int = 5
    split_ratio: float = 0.8
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.model not in learners.MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.model!r}")
        if not 0 < self.split_ratio < 1:
            raise ValueError("split_ratio must lie in (0, 1)")
        if self.actor_mode not in ("mean", "concat4"):
            raise ValueError("actor_mode must be mean or concat4")

    def resolved_params(self):
        return learners.default_params(self.model, self.seed) if self.params is None else self.params

    def echo(self):
        out = {k: getattr(self, k) for k in
               ("model", "with_sna", "actor_mode", "smote", "k_neighbors", "split_ratio",
                "stratified", "seed")}
        out.update({f"param.{k}": v for k, v in _flatten(self.resolved_params()).items()})
        return out


@dataclass
class ExperimentReport:
    accuracy: float
    precision: list
    recall: list
    confusion: np.ndarray
    config: dict
    counts: dict
    n_train: int
    n_test: int
    wall_time: float = 0.0           # kept out of the written report files
    model: object = field(default=None, repr=False)
    test: Optional[Dataset] = field(default=None, repr=False)

    def rows(self):
        rows = [("accuracy", _fmt(self.accuracy)), ("n_train", self.n_train), ("n_test", self.n_test)]
        for c in range(N_CLASSES):
            rows.append((f"precision_{RatingBucket(c).label}", _fmt(self.precision[c])))
            rows.append((f"recall_{RatingBucket(c).label}", _fmt(self.recall[c])))
        for i in range(N_CLASSES):
            for j in range(N_CLASSES):
                rows.append((f"confusion_{i}_{j}", int(self.confusion[i, j])))
        for k in sorted(self.counts):
            rows.append((f"count.{k}", self.counts[k]))
        for k, v in self.config.items():
            rows.append((f"config.{k}", v))
        return rows


def _fmt(x):
    return f"{x:.6f}"


def _per_class(cm):
    prec, rec = [], []
    for c in range(cm.shape[0]):
        col = cm[:, c].sum()
        row = cm[c].sum()
        prec.append(float(cm[c, c] / col) if col else 0.0)
        rec.append(float(cm[c, c] / row) if row else 0.0)
    return prec, rec


def prepare(dataset: Dataset, config: ExperimentConfig):
    """Split, re-impute from training rows, then balance the training fold."""
    tr, te = split_indices(dataset.y, config.split_ratio, config.stratified, config.seed)
    ds = dataset.impute(tr)
    train, test = ds.subset(tr), ds.subset(te)
    counts = {k: v for k, v in dataset.info.items() if isinstance(v, (int, np.integer))}
    X, y = train.X, train.y
    if config.smote:
        res = smote_balance(X, y, SmoteConfig(config.k_neighbors, config.seed), provenance=True)
        X, y = res.X, res.y
        counts["smote_synthetic"] = int(len(y) - res.n_original)
        for cls, k in sorted(res.k_used.items()):
            counts[f"smote_k_clamped_{cls}"] = k
    return X, y, test, counts


def run_on_dataset(dataset: Dataset, config: ExperimentConfig) -> ExperimentReport:
    import time
    start = time.perf_counter()
    X, y, test, counts = prepare(dataset, config)
    model = learners.train(config.model, X, y, config.resolved_params(), n_classes=N_CLASSES)
    pred = model.predict(test.X)
    cm = confusion_matrix(pred, test.y)
    prec, rec = _per_class(cm)
    return ExperimentReport(
        accuracy=float(np.trace(cm) / cm.sum()),
        precision=prec, recall=rec, confusion=cm,
        config=config.echo(), counts=counts,
        n_train=int(len(y)), n_test=int(len(test.y)),
        wall_time=time.perf_counter() - start, model=model, test=test,
    )


def run_experiment(catalog: Catalog, embeddings: Optional[EmbeddingTable],
                   config: ExperimentConfig) -> ExperimentReport:
    """assemble -> split -> SMOTE (train only) -> train -> evaluate on the test fold."""
    if config.with_sna and embeddings is None:
        raise ValueError("with_sna requires embeddings")
    ds = assemble(catalog, embeddings if config.with_sna else None, config.actor_mode)
    return run_on_dataset(ds, config)


# --- importance ------------------------------------------------------------------

@dataclass
class GroupImportance:
    group: str
    importance: float
    std: float


def permutation_importance(model, test: Dataset, groups=None, n_repeats=10, seed=0):
    """Accuracy drop when a group's columns are permuted jointly across rows.

    Returns ``GroupImportance`` items ranked by importance (ties by name).
    """
    if test.n_samples == 0:
        raise ValueError("empty test set")
    groups = test.groups_present() if groups is None else list(groups)
    for g in groups:
        if g not in GROUPS or g not in test.feature_groups:
            raise KeyError(f"unknown feature group {g!r}")
    base = accuracy(model.predict(test.X), test.y)
    out = []
    for gi, g in enumerate(groups):
        cols = test.columns(g)
        rng = np.random.default_rng([seed, gi])
        drops = []
        for _ in range(n_repeats):
            Xp = test.X.copy()
            perm = rng.permutation(test.n_samples)
            Xp[:, cols] = test.X[perm][:, cols]
            drops.append(base - accuracy(model.predict(Xp), test.y))
        out.append(GroupImportance(g, float(np.mean(drops)), float(np.std(drops))))
    return sorted(out, key=lambda r: (-r.importance, r.group))


# --- p/q grid ----------------------------------------------------------------------

@dataclass
class GridReport:
    p_list: list
    q_list: list
    accuracy: np.ndarray            # rows p, columns q
    config: dict
    reports: dict = field(default_factory=dict, repr=False)

    @property
    def best(self):
        i, j = np.unravel_index(np.argmax(self.accuracy), self.accuracy.shape)
        return self.p_list[i], self.q_list[j]

    @property
    def spread(self):
        return float(self.accuracy.max() - self.accuracy.min())

    def rows(self):
        bp, bq = self.best
        return [(f"{p:g}", f"{q:g}", _fmt(self.accuracy[i, j]), int((p, q) == (bp, bq)))
                for i, p in enumerate(self.p_list) for j, q in enumerate(self.q_list)]


def grid_pq(catalog: Catalog, config: ExperimentConfig, p_list=(1, 2, 3, 4), q_list=(1, 2, 3, 4),
            walk_config: WalkConfig = WalkConfig(), embed_config: EmbedConfig = EmbedConfig(),
            threads=1, graph=None, progress=None) -> GridReport:
    """One embedding and one with-SNA experiment per (p, q) cell."""
    if not p_list or not q_list:
        raise ValueError("p_list and q_list must be non-empty")
    graph = build_graph(catalog) if graph is None else graph
    acc = np.zeros((len(p_list), len(q_list)))
    reports = {}
    cfg = ExperimentConfig(**{**{f.name: getattr(config, f.name) for f in fields(config)},
                              "with_sna": True})
    for i, p in enumerate(p_list):
        for j, q in enumerate(q_list):
            wc = WalkConfig(walk_config.walks_per_node, walk_config.walk_length, p, q, walk_config.seed)
            emb = embed_pipeline(graph, wc, embed_config, threads=threads)
            rep = run_experiment(catalog, emb, cfg)
            acc[i, j] = rep.accuracy
            reports[(p, q)] = rep
            if progress:
                progress(p, q, rep.accuracy)
    echo = cfg.echo()
    echo.update({f"walk.{k}": v for k, v in asdict(walk_config).items() if k not in ("p", "q")})
    echo.update({f"embed.{k}": v for k, v in asdict(embed_config).items()})
    return GridReport(list(p_list), list(q_list), acc, echo, reports)


# --- model comparison ------------------------------------------------------------

@dataclass
class ComparisonReport:
    kinds: list
    accuracy: np.ndarray            # rows kinds, columns (without, with)
    config: dict

    def rows(self):
        return [(k, _fmt(self.accuracy[i, 0]), _fmt(self.accuracy[i, 1]),
                 _fmt(self.accuracy[i, 1] - self.accuracy[i, 0]))
                for i, k in enumerate(self.kinds)]


def compare_models(catalog: Catalog, embeddings: EmbeddingTable, seed=0, kinds=learners.MODEL_KINDS,
                   params=None, actor_mode="mean", smote=True, progress=None) -> ComparisonReport:
    """Accuracy without and with graph features for each model family."""
    params = params or {}
    plain = assemble(catalog, None, actor_mode)
    rich = assemble(catalog, embeddings, actor_mode)
    acc = np.zeros((len(kinds), 2))
    echo = {"seed": seed, "actor_mode": actor_mode, "smote": smote}
    for i, kind in enumerate(kinds):
        cfg = ExperimentConfig(model=kind, params=params.get(kind), actor_mode=actor_mode,
                               smote=smote, seed=seed)
        for col, ds in enumerate((plain, rich)):
            acc[i, col] = run_on_dataset(ds, cfg).accuracy
            if progress:
                progress(kind, bool(col), acc[i, col])
        echo.update({f"{kind}.{k}": v for k, v in _flatten(cfg.resolved_params()).items()})
    return ComparisonReport(list(kinds), acc, echo)


# --- class shares ----------------------------------------------------------------

def class_share_rows(full: Catalog, reduced: Optional[Catalog] = None):
    """Bucket shares of the catalog(s) next to the published reference shares."""
    rows = []
    fs = bucket_shares(full)
    rs = bucket_shares(reduced) if reduced is not None else None
    for c in range(N_CLASSES):
        row = [RatingBucket(c).label, _fmt(fs[c])]
        if rs is not None:
            row.append(_fmt(rs[c]))
        row.append(_fmt(REFERENCE_SHARES[c]))
        rows.append(tuple(row))
    header = ("bucket", "full") + (("reduced",) if rs is not None else ()) + ("reference",)
    return header, rows


# --- writers -----------------------------------------------------------------------

def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def markdown_table(header, rows):
    lines = ["| " + " | ".join(str(h) for h in header) + " |",
             "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
    return "\n".join(lines)


def grid_markdown(report: GridReport):
    bp, bq = report.best
    header = ["p \\ q", *report.q_list]
    rows = []
    for i, p in enumerate(report.p_list):
        cells = []
        for j, q in enumerate(report.q_list):
            v = _fmt(report.accuracy[i, j])
            cells.append(f"**{v}**" if (p, q) == (bp, bq) else v)
        rows.append([p, *cells])
    return (f"# Accuracy over the p/q grid\n\n{markdown_table(header, rows)}\n\n"
            f"Best cell: p={bp}, q={bq}. Spread (max - min): {_fmt(report.spread)}.\n")


def comparison_markdown(report: ComparisonReport):
    header = ["model", "without SNA", "with SNA", "gain"]
    return f"# Model comparison\n\n{markdown_table(header, report.rows())}\n"


def experiment_markdown(report: ExperimentReport, importance=None):
    labels = [RatingBucket(c).label for c in range(N_CLASSES)]
    out = [f"# Experiment\n\nAccuracy: {_fmt(report.accuracy)} "
           f"(train rows {report.n_train}, test rows {report.n_test})\n"]
    cm_rows = [[labels[i], *report.confusion[i].tolist()] for i in range(N_CLASSES)]
    out.append("## Confusion matrix (rows true, columns predicted)\n\n"
               + markdown_table(["true \\ pred", *labels], cm_rows) + "\n")
    pr = [[labels[c], _fmt(report.precision[c]), _fmt(report.recall[c])] for c in range(N_CLASSES)]
    out.append("## Per-class\n\n" + markdown_table(["bucket", "precision", "recall"], pr) + "\n")
    if importance:
        rows = [[r.group, _fmt(r.importance), _fmt(r.std)] for r in importance]
        out.append("## Grouped permutation importance\n\n"
                   + markdown_table(["group", "importance", "std"], rows) + "\n")
    out.append("## Counts\n\n" + markdown_table(["key", "value"], sorted(report.counts.items())) + "\n")
    out.append("## Configuration\n\n" + markdown_table(["key", "value"], list(report.config.items())) + "\n")
    return "\n".join(out)


def importance_rows(importance):
    return [(r.group, _fmt(r.importance), _fmt(r.std), rank + 1) for rank, r in enumerate(importance)]


__all__ = [
    "ExperimentConfig", "ExperimentReport", "GridReport", "ComparisonReport", "GroupImportance",
    "split", "split_indices", "accuracy", "confusion_matrix", "run_experiment", "run_on_dataset",
    "grid_pq", "compare_models", "permutation_importance", "class_share_rows", "SNA_GROUPS",
]
