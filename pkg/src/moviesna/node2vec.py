"""Node2Vec: second-order biased walks plus skip-gram with negative sampling."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np
from scipy.special import expit

from . import _kernels as K


class DeadEnd(LookupError):
    """The current node has no out-neighbors; a walk stops here."""


@dataclass(frozen=True)
class WalkConfig:
    walks_per_node: int = 20
    walk_length: int = 40
    p: float = 1.0
    q: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.walks_per_node < 1:
            raise ValueError("walks_per_node must be >= 1")
        if self.walk_length < 2:
            raise ValueError("walk_length must be >= 2")
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")


FULL_SCALE_WALKS = dict(walks_per_node=200, walk_length=80)    # r=200, l=80 for full-size runs


@dataclass(frozen=True)
class EmbedConfig:
    dim: int = 24
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives < 0 or self.epochs < 0:
            raise ValueError("negatives and epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def transition_probs(graph, prev, cur, p, q):
    """Next-step distribution from ``cur`` having arrived from ``prev``.

    Neighbor ``x`` of ``cur`` gets weight ``w(cur, x) * alpha`` where alpha is
    ``1/p`` for ``x == prev``, 1 when ``x`` and ``prev`` share an edge (either
    direction), and ``1/q`` otherwise.  ``prev=None`` means the first step,
    which is weight-proportional.  Returns ``{neighbor: probability}``.
    """
    out = graph.successors(cur)
    if not out:
        raise DeadEnd(cur)
    if prev is not None and not graph.has_edge(prev, cur):
        raise ValueError(f"no edge {prev} -> {cur}")
    raw = {}
    for x in sorted(out):
        w = float(out[x])
        if prev is None:
            alpha = 1.0
        elif x == prev:
            alpha = 1.0 / p
        elif graph.has_edge(prev, x) or graph.has_edge(x, prev):
            alpha = 1.0
        else:
            alpha = 1.0 / q
        raw[x] = w * alpha
    z = sum(raw.values())
    return {x: v / z for x, v in raw.items()}


def alias_distribution(prob, alias):
    """Exact distribution encoded by an alias table."""
    k = len(prob)
    dist = np.asarray(prob, float) / k
    for i in range(k):
        dist[alias[i]] += (1.0 - prob[i]) / k
    return dist


class WalkSampler:
    """CSR view of a graph with precomputed alias tables for one (p, q)."""

    def __init__(self, graph, p=1.0, q=1.0):
        self.nodes = graph.nodes()
        self.index = {n: i for i, n in enumerate(self.nodes)}
        _, mat = graph.to_csr(self.nodes)
        _, und = graph.undirected_adjacency(self.nodes)
        self.indptr = mat.indptr.astype(np.int64)
        self.indices = mat.indices.astype(np.int64)
        self.weights = mat.data.astype(np.float64)
        und_indptr = und.indptr.astype(np.int64)
        und_indices = und.indices.astype(np.int64)
        self.p, self.q = float(p), float(q)
        self.node_prob, self.node_alias = K.node_tables(self.indptr, self.weights)
        self.edge_off, self.edge_prob, self.edge_alias = K.edge_tables(
            self.indptr, self.indices, self.weights, und_indptr, und_indices, self.p, self.q)

    def edge_index(self, prev, cur):
        u, v = self.index[prev], self.index[cur]
        lo, hi = self.indptr[u], self.indptr[u + 1]
        j = lo + np.searchsorted(self.indices[lo:hi], v)
        if j >= hi or self.indices[j] != v:
            raise ValueError(f"no edge {prev} -> {cur}")
        return int(j)

    def table_distribution(self, prev, cur):
        """Distribution implied by the stored alias table for state (prev, cur)."""
        v = self.index[cur]
        lo, hi = self.indptr[v], self.indptr[v + 1]
        if hi == lo:
            raise DeadEnd(cur)
        if prev is None:
            prob, alias = self.node_prob[lo:hi], self.node_alias[lo:hi]
        else:
            e = self.edge_index(prev, cur)
            a, b = self.edge_off[e], self.edge_off[e + 1]
            prob, alias = self.edge_prob[a:b], self.edge_alias[a:b]
        dist = alias_distribution(prob, alias)
        return {self.nodes[self.indices[lo + k]]: float(dist[k]) for k in range(hi - lo)}

    def walks(self, starts, length, rng, parallel=False):
        """Walks from node indices ``starts``; one row of uniforms per walk."""
        starts = np.asarray(starts, np.int64)
        uniforms = rng.random((starts.size, 2 * (length - 1)))
        fn = K.walk_batch_parallel if parallel else K.walk_batch
        return fn(starts, length, self.indptr, self.indices, self.node_prob, self.node_alias,
                  self.edge_off, self.edge_prob, self.edge_alias, uniforms)


@dataclass
class WalkCorpus:
    """Walks as node-index sequences over a shared vocabulary."""

    nodes: list
    tokens: np.ndarray      # concatenated walks
    starts: np.ndarray
    lengths: np.ndarray

    @classmethod
    def from_sentences(cls, sentences, vocabulary=None):
        vocab = list(vocabulary) if vocabulary is not None else sorted({t for s in sentences for t in s})
        index = {n: i for i, n in enumerate(vocab)}
        lengths = np.array([len(s) for s in sentences], np.int64)
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(np.int64)
        tokens = np.array([index[t] for s in sentences for t in s], np.int64)
        return cls(vocab, tokens, starts, lengths)

    def __len__(self):
        return len(self.lengths)

    def sentences(self):
        return [[self.nodes[t] for t in self.tokens[s:s + n]]
                for s, n in zip(self.starts, self.lengths)]


def simulate_walks(graph, config: WalkConfig, threads=1, sampler=None) -> WalkCorpus:
    """``walks_per_node`` rounds; each round visits every node once in a
    seeded shuffled order.  Round ``r`` draws from its own stream
    (``SeedSequence([seed, r])``), so output does not depend on ``threads``.
    """
    sampler = sampler or WalkSampler(graph, config.p, config.q)
    n = len(sampler.nodes)
    if n == 0:
        raise ValueError("cannot walk an empty graph")
    blocks, lens = [], []
    for r in range(config.walks_per_node):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, r]))
        order = rng.permutation(n)
        walks, wl = sampler.walks(order, config.walk_length, rng, parallel=threads > 1)
        blocks.append(walks)
        lens.append(wl)
    walks = np.concatenate(blocks)
    lengths = np.concatenate(lens).astype(np.int64)
    tokens = walks[walks >= 0].astype(np.int64)
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(np.int64)
    return WalkCorpus(sampler.nodes, tokens, starts, lengths)


# --- skip-gram -------------------------------------------------------------------

def sgns_loss_grad(v_center, u_context, u_negatives):
    """Loss and gradients for one (center, context, negatives) example.

    Returns ``(loss, d_center, d_context, d_negatives)``.
    """
    u_negatives = np.atleast_2d(u_negatives)
    s_pos = expit(u_context @ v_center)
    s_neg = expit(u_negatives @ v_center)
    loss = -np.log(s_pos) - np.sum(np.log(1.0 - s_neg))
    d_center = (s_pos - 1.0) * u_context + s_neg @ u_negatives
    d_context = (s_pos - 1.0) * v_center
    d_negatives = np.outer(s_neg, v_center)
    return float(loss), d_center, d_context, d_negatives


@dataclass
class EmbeddingTable:
    node_ids: list
    vectors: np.ndarray
    meta: dict = field(default_factory=dict)
    output_vectors: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self._index = {n: i for i, n in enumerate(self.node_ids)}

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __contains__(self, nid):
        return nid in self._index

    def __len__(self):
        return len(self.node_ids)

    def vector(self, nid):
        return self.vectors[self._index[nid]]

    def cosine(self, a, b):
        x, y = self.vector(a), self.vector(b)
        return float(x @ y / (np.linalg.norm(x) * np.linalg.norm(y)))

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            meta = " ".join(f"{k}={v}" for k, v in self.meta.items())
            fh.write(f"# {meta}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node_id"] + [f"e{i}" for i in range(self.dim)])
            for nid, vec in zip(self.node_ids, self.vectors):
                w.writerow([nid] + [repr(float(x)) for x in vec])

    @classmethod
    def read_csv(cls, path):
        meta = {}
        with open(path, newline="", encoding="utf-8") as fh:
            first = fh.readline()
            if first.startswith("#"):
                for item in first[1:].split():
                    k, _, v = item.partition("=")
                    meta[k] = v
            else:
                fh.seek(0)
            reader = csv.reader(fh)
            next(reader)
            ids, rows = [], []
            for row in reader:
                ids.append(row[0])
                rows.append([float(x) for x in row[1:]])
        return cls(ids, np.array(rows, dtype=float), meta)


def _unigram_alias(corpus, power=0.75):
    counts = np.bincount(corpus.tokens, minlength=len(corpus.nodes)).astype(float)
    weights = counts ** power
    if weights.sum() == 0:
        raise ValueError("empty vocabulary")
    return K.alias_setup(weights / weights.sum())


def init_vectors(n, dim, seed):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
    return rng.uniform(-0.5 / dim, 0.5 / dim, size=(n, dim))


def train_skipgram(corpus: WalkCorpus, config: EmbedConfig, threads=1, chunk_walks=4096) -> EmbeddingTable:
    """Skip-gram with negative sampling over walk sentences.

    Negatives follow unigram^0.75; the learning rate decays linearly to
    ``1e-4 * learning_rate`` over all epochs.  Single-threaded training is
    deterministic; ``threads > 1`` switches to unsynchronized parallel
    updates and gives up bit-reproducibility.
    """
    if len(corpus.tokens) == 0:
        raise ValueError("empty vocabulary")
    n, d = len(corpus.nodes), config.dim
    syn0 = init_vectors(n, d, config.seed)
    syn1 = np.zeros((n, d))
    meta = dict(d=d, window=config.window, negatives=config.negatives,
                epochs=config.epochs, lr=config.learning_rate, seed=config.seed)
    if config.epochs == 0:
        return EmbeddingTable(list(corpus.nodes), syn0, meta, syn1)
    neg_prob, neg_alias = _unigram_alias(corpus)
    pairs = K.pair_counts(corpus.lengths, config.window)
    total = float(pairs.sum() * config.epochs)
    if total == 0:
        raise ValueError("corpus has no (center, context) pairs")
    lr_min = config.learning_rate * 1e-4
    kernel = K.sgns_chunk_hogwild if threads > 1 else K.sgns_chunk
    done = 0
    losses = []
    for epoch in range(config.epochs):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1, epoch]))
        epoch_loss = 0.0
        for lo in range(0, len(corpus), chunk_walks):
            hi = min(lo + chunk_walks, len(corpus))
            chunk_pairs = pairs[lo:hi]
            pair_off = np.concatenate([[0], np.cumsum(chunk_pairs)[:-1]]).astype(np.int64)
            n_pairs = int(chunk_pairs.sum())
            neg_u = rng.random(n_pairs * config.negatives)
            epoch_loss += kernel(
                corpus.tokens, corpus.starts[lo:hi], corpus.lengths[lo:hi], pair_off,
                config.window, config.negatives, syn0, syn1, neg_u, neg_prob, neg_alias,
                config.learning_rate, lr_min, float(done), total)
            done += n_pairs
        losses.append(epoch_loss / max(pairs.sum(), 1))
    meta["final_loss"] = round(float(losses[-1]), 6)
    return EmbeddingTable(list(corpus.nodes), syn0, meta, syn1)


def set_threads(threads):
    numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))


def embed_pipeline(graph, walk_config: WalkConfig, embed_config: EmbedConfig, threads=1) -> EmbeddingTable:
    """Walks followed by skip-gram; the table covers every graph node."""
    if threads > 1:
        set_threads(threads)
    corpus = simulate_walks(graph, walk_config, threads=threads)
    table = train_skipgram(corpus, embed_config, threads=threads)
    table.meta = dict(p=walk_config.p, q=walk_config.q, d=embed_config.dim,
                      r=walk_config.walks_per_node, l=walk_config.walk_length,
                      seed=walk_config.seed, **{k: v for k, v in table.meta.items()
                                                if k not in ("d", "seed")})
    return table
