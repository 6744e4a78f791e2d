"""Directed, role-typed community graph and forest-fire catalog reduction."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import sparse

from .catalog import ACTOR, AGENT, CASTING, DIRECTOR, WRITER, Catalog

NODE_KINDS = (ACTOR, DIRECTOR, CASTING, AGENT)


def node_id(person_id: str, kind: str) -> str:
    """Graph node for a person acting in one role-kind."""
    return f"{person_id}:{kind}"


def split_node_id(nid: str):
    person, _, kind = nid.rpartition(":")
    return person, kind


class CommunityGraph:
    """Weighted digraph over (person, role-kind) nodes.

    Treat instances as read-only once built; ``build_graph`` and ``read_graph``
    are the intended constructors.  Adjacency is kept in both directions.
    """

    def __init__(self):
        self._kind = {}
        self._out = defaultdict(dict)
        self._in = defaultdict(dict)
        self._n_edges = 0

    # construction helpers, used by the builders in this module
    def _add_node(self, nid, kind):
        if kind not in NODE_KINDS:
            raise ValueError(f"unknown node kind {kind!r}")
        prev = self._kind.setdefault(nid, kind)
        if prev != kind:
            raise ValueError(f"node {nid} already declared as {prev}")

    def _add_edge(self, src, dst, weight=1):
        if src == dst:
            raise ValueError(f"self-loop on {src}")
        if src not in self._kind or dst not in self._kind:
            raise KeyError(f"edge {src}->{dst} has an undeclared endpoint")
        out = self._out[src]
        if dst not in out:
            self._n_edges += 1
            out[dst] = 0
        out[dst] += weight
        self._in[dst][src] = out[dst]

    @property
    def n_nodes(self):
        return len(self._kind)

    @property
    def n_edges(self):
        return self._n_edges

    def nodes(self):
        return sorted(self._kind)

    def kind(self, nid):
        return self._kind[nid]

    def __contains__(self, nid):
        return nid in self._kind

    def successors(self, nid):
        return self._out.get(nid, {})

    def predecessors(self, nid):
        return self._in.get(nid, {})

    def has_edge(self, src, dst):
        return dst in self._out.get(src, {})

    def weight(self, src, dst):
        return self._out[src][dst]

    def edges(self):
        """Yield ``(src, dst, weight)`` in sorted order."""
        for src in sorted(self._out):
            out = self._out[src]
            for dst in sorted(out):
                yield src, dst, out[dst]

    def edge_set(self):
        return {(s, d): w for s, d, w in self.edges()}

    def degree(self, nid, direction="total"):
        if nid not in self._kind:
            raise KeyError(f"unknown node {nid}")
        n_out = len(self._out.get(nid, ()))
        n_in = len(self._in.get(nid, ()))
        if direction == "out":
            return n_out
        if direction == "in":
            return n_in
        if direction == "total":
            return n_in + n_out
        raise ValueError(f"direction must be in/out/total, got {direction!r}")

    def to_csr(self, nodes=None):
        """Weighted adjacency as CSR, rows/cols ordered like ``nodes``."""
        nodes = self.nodes() if nodes is None else list(nodes)
        index = {n: i for i, n in enumerate(nodes)}
        rows, cols, vals = [], [], []
        for s, d, w in self.edges():
            rows.append(index[s])
            cols.append(index[d])
            vals.append(float(w))
        n = len(nodes)
        mat = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
        mat.sort_indices()
        return nodes, mat

    def undirected_adjacency(self, nodes=None):
        """Binary adjacency of the undirected projection."""
        nodes, mat = self.to_csr(nodes)
        a = (mat + mat.T).tocsr()
        a.data[:] = 1.0
        a.sort_indices()
        return nodes, a

    def weakly_connected_components(self):
        nodes, a = self.undirected_adjacency()
        n_comp, labels = sparse.csgraph.connected_components(a, directed=False)
        comps = defaultdict(list)
        for n, lab in zip(nodes, labels):
            comps[lab].append(n)
        return sorted(comps.values(), key=lambda c: (-len(c), c[0]))

    def write_csv(self, directory):
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "nodes.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("node_id", "kind"))
            for n in self.nodes():
                w.writerow((n, self._kind[n]))
        with open(d / "edges.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("src", "dst", "weight", "src_kind", "dst_kind"))
            for s, t, wt in self.edges():
                w.writerow((s, t, wt, self._kind[s], self._kind[t]))


def read_graph(directory) -> CommunityGraph:
    d = Path(directory)
    g = CommunityGraph()
    with open(d / "nodes.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            g._add_node(row["node_id"], row["kind"])
    with open(d / "edges.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            g._add_edge(row["src"], row["dst"], int(row["weight"]))
    return g


def from_edges(edges, kinds=None) -> CommunityGraph:
    """Small graphs for analysis and tests: ``edges`` is ``[(src, dst[, w])]``.

    Every node defaults to kind ``actor`` unless ``kinds`` maps it otherwise.
    """
    kinds = dict(kinds or {})
    g = CommunityGraph()
    for e in edges:
        for n in e[:2]:
            g._add_node(n, kinds.get(n, ACTOR))
    for n, k in kinds.items():
        g._add_node(n, k)
    for e in edges:
        g._add_edge(e[0], e[1], e[2] if len(e) > 2 else 1)
    return g


def build_graph(catalog: Catalog) -> CommunityGraph:
    """Apply the collaboration rules title by title.

    Per title: actor pairs link both ways, director -> actor,
    casting director -> actor, director -> casting director.  Each credited
    actor with an agent gets a single actor -> agent edge regardless of how
    many titles they appear in.  Writers are not nodes.
    """
    g = CommunityGraph()
    by_title = catalog.credits_by_title()
    actor_people = set()
    for tid in sorted(by_title):
        crew = defaultdict(list)
        for c in by_title[tid]:
            if c.role == WRITER:
                continue
            nid = node_id(c.person_id, c.role)
            g._add_node(nid, c.role)
            crew[c.role].append(nid)
            if c.role == ACTOR:
                actor_people.add(c.person_id)
        actors = sorted(crew[ACTOR])
        for a in actors:
            for b in actors:
                if a != b:
                    g._add_edge(a, b)
        for d in crew[DIRECTOR]:
            for a in actors:
                g._add_edge(d, a)
            for c in crew[CASTING]:
                g._add_edge(d, c)
        for c in crew[CASTING]:
            for a in actors:
                g._add_edge(c, a)
    for pid in sorted(actor_people):
        agent = catalog.person(pid).agent_id
        if agent is not None:
            g._add_node(node_id(agent, AGENT), AGENT)
            g._add_edge(node_id(pid, ACTOR), node_id(agent, AGENT))
    return g


# --- forest-fire reduction ------------------------------------------------------

@dataclass(frozen=True)
class FireConfig:
    n_seed_actors: int = 100
    p_burn: float = 0.7
    node_budget: Optional[int] = None   # None: unbounded
    seed: int = 0

    def __post_init__(self):
        if self.n_seed_actors < 1:
            raise ValueError("n_seed_actors must be >= 1")
        if not 0 < self.p_burn <= 1:
            raise ValueError("p_burn must lie in (0, 1]")
        if self.node_budget is not None and self.node_budget < self.n_seed_actors:
            raise ValueError("node_budget must be >= n_seed_actors")


def popular_actors(catalog: Catalog, n: int):
    """Top-n actors by total imdb_votes over their credited titles."""
    votes = defaultdict(int)
    for c in catalog.credits:
        if c.role == ACTOR:
            votes[c.person_id] += catalog.title(c.title_id).imdb_votes
    if n > len(votes):
        raise ValueError(f"n_seed_actors={n} exceeds the {len(votes)} credited actors")
    ranked = sorted(votes, key=lambda p: (-votes[p], p))
    return ranked[:n]


def forest_fire_sample(catalog: Catalog, config: FireConfig) -> Catalog:
    """Reduce a catalog by burning outward from its most popular actors.

    Rounds alternate between burning the titles of frontier people (each
    title kept with probability ``p_burn``) and admitting the actors,
    directors and casting directors of kept titles until the node budget is
    spent.  Writers of kept titles come along without counting toward the
    budget; agents of admitted people are attached at the end.
    """
    rng = np.random.default_rng(config.seed)
    budget = math.inf if config.node_budget is None else config.node_budget
    by_title = catalog.credits_by_title()
    by_person = catalog.credits_by_person()
    graph_roles = (ACTOR, DIRECTOR, CASTING)

    seeds = popular_actors(catalog, config.n_seed_actors)
    admitted = dict.fromkeys(seeds)
    kept_titles = set()
    tried = set()
    frontier = list(seeds)
    while frontier:
        nxt = []
        for pid in frontier:
            for tid in sorted({c.title_id for c in by_person[pid]}):
                if (pid, tid) in tried or tid in kept_titles:
                    continue
                tried.add((pid, tid))
                if rng.random() >= config.p_burn:
                    continue
                kept_titles.add(tid)
                for c in by_title[tid]:
                    if c.role in graph_roles and c.person_id not in admitted and len(admitted) < budget:
                        admitted[c.person_id] = None
                        nxt.append(c.person_id)
        frontier = nxt
        if len(admitted) >= budget:
            break

    people = set(admitted)
    for tid in kept_titles:
        for c in by_title[tid]:
            if c.role == WRITER:
                people.add(c.person_id)
    for pid in list(people):
        agent = catalog.person(pid).agent_id
        if agent is not None:
            people.add(agent)
    credits = [c for c in catalog.credits if c.title_id in kept_titles and c.person_id in people]
    return Catalog(
        titles=[catalog.title(t) for t in kept_titles],
        people=[catalog.person(p) for p in people],
        credits=credits,
    )
