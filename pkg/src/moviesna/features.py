"""Rating buckets, crew history averages and feature-matrix assembly."""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Optional

import numpy as np

from .catalog import ACTOR, CASTING, DIRECTOR, WRITER, Catalog, parse_tenths
from .graph import node_id

GROUPS = ("metadata", "history", "sna_director", "sna_casting", "sna_actor")
SNA_GROUPS = GROUPS[2:]
TOP_K = 20


class RatingBucket(IntEnum):
    B0_3 = 0
    B4_5 = 1
    B6_7 = 2
    B8_10 = 3

    @property
    def label(self):
        return ("0-3", "4-5", "6-7", "8-10")[self.value]


def bucketize_tenths(tenths: int) -> RatingBucket:
    if not 0 <= tenths <= 100:
        raise ValueError(f"rating {tenths / 10} outside [0, 10]")
    whole = (tenths + 5) // 10          # round half up
    if whole <= 3:
        return RatingBucket.B0_3
    if whole <= 5:
        return RatingBucket.B4_5
    if whole <= 7:
        return RatingBucket.B6_7
    return RatingBucket.B8_10


def bucketize(imdb_rating) -> RatingBucket:
    """Map a 0-10 rating to its bucket after rounding half up to an integer.

    Accepts a float, a decimal string or ``Decimal``; floats are read as their
    nearest one-decimal value.
    """
    if isinstance(imdb_rating, str):
        return bucketize_tenths(parse_tenths(imdb_rating))
    r = float(imdb_rating)
    if not 0.0 <= r <= 10.0:
        raise ValueError(f"rating {r} outside [0, 10]")
    return bucketize_tenths(int(round(r * 10)))


def bucket_shares(catalog: Catalog):
    counts = np.bincount([bucketize_tenths(t.rating_tenths) for t in catalog.titles], minlength=4)
    return counts / max(counts.sum(), 1)


@dataclass(frozen=True)
class History:
    avg_imdb: Optional[float]
    avg_rt: Optional[float]
    n_titles: int


class HistoryIndex:
    """Per-person lists of (year, imdb tenths, rt) for credited titles."""

    def __init__(self, catalog: Catalog):
        self._rows = defaultdict(list)
        for c in catalog.credits:
            t = catalog.title(c.title_id)
            self._rows[c.person_id].append((t.year, t.rating_tenths, t.rt_user_rating, t.title_id))
        self._catalog = catalog

    def averages(self, person_id, as_of_year) -> History:
        if not self._catalog.has_person(person_id):
            raise KeyError(f"unknown person {person_id}")
        seen = {}
        for year, tenths, rt, tid in self._rows.get(person_id, ()):
            if year < as_of_year:
                seen[tid] = (tenths, rt)
        if not seen:
            return History(None, None, 0)
        imdb = [v[0] for v in seen.values()]
        rts = [v[1] for v in seen.values() if v[1] is not None]
        return History(
            avg_imdb=sum(imdb) / len(imdb) / 10,
            avg_rt=sum(rts) / len(rts) if rts else None,
            n_titles=len(seen),
        )


def historical_averages(catalog: Catalog, person_id, as_of_year) -> History:
    """Mean IMDb / RT ratings over the person's titles released before ``as_of_year``."""
    return HistoryIndex(catalog).averages(person_id, as_of_year)


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: list
    feature_groups: list          # group name per column
    title_ids: list
    missing: np.ndarray = None    # True where a value was imputed
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.missing is None:
            self.missing = np.zeros(self.X.shape, dtype=bool)
        if self.X.shape[0] != len(self.y):
            raise ValueError("X rows and y length differ")
        if len(self.feature_names) != self.X.shape[1] or len(self.feature_groups) != self.X.shape[1]:
            raise ValueError("feature annotations do not match X width")

    @property
    def n_samples(self):
        return self.X.shape[0]

    def columns(self, group):
        if group not in GROUPS:
            raise KeyError(f"unknown feature group {group!r}")
        return [i for i, g in enumerate(self.feature_groups) if g == group]

    def groups_present(self):
        return [g for g in GROUPS if g in self.feature_groups]

    def subset(self, rows):
        rows = np.asarray(rows)
        return replace(self, X=self.X[rows], y=self.y[rows],
                       title_ids=[self.title_ids[i] for i in rows],
                       missing=self.missing[rows], info=dict(self.info))

    def impute(self, rows=None) -> "Dataset":
        """Fill imputed cells with column means over ``rows`` (all rows if None).

        Columns with no observed value among ``rows`` are filled with 0.
        """
        ref = np.arange(self.n_samples) if rows is None else np.asarray(rows)
        X = self.X.copy()
        for j in np.flatnonzero(self.missing.any(axis=0)):
            observed = ref[~self.missing[ref, j]]
            fill = float(self.X[observed, j].mean()) if len(observed) else 0.0
            X[self.missing[:, j], j] = fill
        return replace(self, X=X, info=dict(self.info))

    def write_csv(self, directory):
        from pathlib import Path
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "features.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["title_id", *self.feature_names, "label"])
            for tid, row, lab in zip(self.title_ids, self.X, self.y):
                w.writerow([tid, *(repr(float(v)) for v in row), int(lab)])
        with open(d / "groups.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature_name", "group"])
            for name, grp in zip(self.feature_names, self.feature_groups):
                w.writerow([name, grp])


def _top_categories(values, k):
    counts = Counter(values)
    ranked = sorted(counts, key=lambda v: (-counts[v], v))
    return ranked[:k]


def _mean_or_none(xs):
    xs = [x for x in xs if x is not None]
    return sum(xs) / len(xs) if xs else None


def assemble(catalog: Catalog, embeddings=None, actor_mode="mean", top_k=TOP_K) -> Dataset:
    """Build the per-title feature matrix and bucket labels.

    Metadata: year, runtime and top-``top_k`` one-hots (plus an ``other``
    column) for genre, language and production type.  History: mean prior
    IMDb and RT ratings of the director, casting director, writer and the mean
    over actors.  With ``embeddings``: director, casting director and actor
    vectors, the latter averaged (``mean``) or the four top-billed actors
    side by side (``concat4``, zero-padded).

    Titles without a director or without actors are dropped.  Missing history
    is imputed with the column mean and flagged in ``Dataset.missing`` so a
    caller can re-impute from training rows only; missing embeddings become
    zero vectors.
    """
    if actor_mode not in ("mean", "concat4"):
        raise ValueError(f"actor_mode must be 'mean' or 'concat4', got {actor_mode!r}")
    by_title = catalog.credits_by_title()
    hist = HistoryIndex(catalog)

    kept, dropped = [], 0
    for t in catalog.titles:
        roles = {c.role for c in by_title.get(t.title_id, ())}
        if DIRECTOR in roles and ACTOR in roles:
            kept.append(t)
        else:
            dropped += 1
    if not kept:
        raise ValueError("no titles left after dropping those without director or actors")

    genres = _top_categories([g for t in kept for g in t.genres], top_k)
    langs = _top_categories([t.language for t in kept], top_k)
    ptypes = _top_categories([t.production_type for t in kept], top_k)

    names, groups = ["year", "runtime_min"], ["metadata", "metadata"]
    for prefix, cats in (("genre", genres), ("language", langs), ("type", ptypes)):
        names += [f"{prefix}={c}" for c in cats] + [f"{prefix}=other"]
        groups += ["metadata"] * (len(cats) + 1)
    hist_roles = ("director", "casting", "writer", "actors")
    for r in hist_roles:
        names += [f"hist_{r}_imdb", f"hist_{r}_rt"]
        groups += ["history", "history"]
    d = embeddings.dim if embeddings is not None else 0
    if embeddings is not None:
        names += [f"sna_director_{i}" for i in range(d)]
        groups += ["sna_director"] * d
        names += [f"sna_casting_{i}" for i in range(d)]
        groups += ["sna_casting"] * d
        n_actor_slots = 1 if actor_mode == "mean" else 4
        for s in range(n_actor_slots):
            tag = "sna_actor" if actor_mode == "mean" else f"sna_actor{s + 1}"
            names += [f"{tag}_{i}" for i in range(d)]
            groups += ["sna_actor"] * d

    rows, miss, labels, ids = [], [], [], []
    missing_vectors = 0
    missing_history = 0

    def vec(pid, kind):
        nonlocal missing_vectors
        nid = node_id(pid, kind)
        if nid in embeddings:
            return embeddings.vector(nid)
        missing_vectors += 1
        return np.zeros(d)

    for t in kept:
        credits = by_title[t.title_id]
        crew = defaultdict(list)
        for c in credits:
            crew[c.role].append(c)
        meta = [float(t.year), float(t.runtime_min)]
        for cats, values in ((genres, set(t.genres)), (langs, {t.language}),
                             (ptypes, {t.production_type})):
            onehot = [1.0 if c in values else 0.0 for c in cats]
            onehot.append(1.0 if values - set(cats) else 0.0)
            meta += onehot

        feats, flags = list(meta), [False] * len(meta)
        for role in (DIRECTOR, CASTING, WRITER, ACTOR):
            hs = [hist.averages(c.person_id, t.year) for c in crew.get(role, ())]
            for value in (_mean_or_none([h.avg_imdb for h in hs]),
                          _mean_or_none([h.avg_rt for h in hs])):
                feats.append(np.nan if value is None else value)
                flags.append(value is None)
                missing_history += value is None

        if embeddings is not None:
            for role in (DIRECTOR, CASTING):
                people = crew.get(role, ())
                if people:
                    feats += list(np.mean([vec(c.person_id, role) for c in people], axis=0))
                else:
                    missing_vectors += 1
                    feats += [0.0] * d
            actors = sorted(crew[ACTOR], key=lambda c: (c.billing_order, c.person_id))
            if actor_mode == "mean":
                feats += list(np.mean([vec(c.person_id, ACTOR) for c in actors], axis=0))
            else:
                for slot in range(4):
                    if slot < len(actors):
                        feats += list(vec(actors[slot].person_id, ACTOR))
                    else:
                        feats += [0.0] * d
            flags += [False] * (len(feats) - len(flags))
        rows.append(feats)
        miss.append(flags)
        labels.append(int(bucketize_tenths(t.rating_tenths)))
        ids.append(t.title_id)

    ds = Dataset(
        X=np.array(rows, dtype=float),
        y=np.array(labels, dtype=int),
        feature_names=names,
        feature_groups=groups,
        title_ids=ids,
        missing=np.array(miss, dtype=bool),
        info=dict(dropped_titles=dropped, missing_history=int(missing_history),
                  missing_embeddings=int(missing_vectors), actor_mode=actor_mode),
    )
    return ds.impute()
