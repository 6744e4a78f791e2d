"""Independent reference implementations used by the tests.

Everything here is deliberately naive (dense matrices, explicit path
enumeration, plain loops) and shares no code with the package.
"""

import itertools
from collections import deque

import numpy as np

from moviesna.catalog import (
    CreditRecord, PersonRecord, TitleRecord, Catalog,
    ACTOR, AGENT, CASTING, DIRECTOR, WRITER,
)


def expected_edges(catalog):
    """Edge multiset by enumerating every ordered pair of credits per title."""
    edges = {}

    def add(s, d):
        edges[(s, d)] = edges.get((s, d), 0) + 1

    titles = {}
    for c in catalog.credits:
        titles.setdefault(c.title_id, []).append(c)
    for credits in titles.values():
        for a, b in itertools.product(credits, credits):
            if a.person_id == b.person_id and a.role == b.role:
                continue
            src = f"{a.person_id}:{a.role}"
            dst = f"{b.person_id}:{b.role}"
            if a.role == ACTOR and b.role == ACTOR:
                add(src, dst)
            elif a.role == DIRECTOR and b.role in (ACTOR, CASTING):
                add(src, dst)
            elif a.role == CASTING and b.role == ACTOR:
                add(src, dst)
    people = {p.person_id: p for p in catalog.people}
    seen = set()
    for c in catalog.credits:
        if c.role == ACTOR and c.person_id not in seen:
            seen.add(c.person_id)
            agent = people[c.person_id].agent_id
            if agent:
                add(f"{c.person_id}:{ACTOR}", f"{agent}:{AGENT}")
    return edges


def random_catalog(rng, max_titles=10, max_people=12):
    """Small random but valid catalog; people may hold several roles."""
    n_people = int(rng.integers(3, max_people + 1))
    n_agents = int(rng.integers(0, 3))
    people = []
    agents = [f"g{i}" for i in range(n_agents)]
    for a in agents:
        people.append(PersonRecord(a, a, frozenset({AGENT})))
    for i in range(n_people):
        roles = {r for r in (ACTOR, DIRECTOR, CASTING, WRITER) if rng.random() < 0.45} or {ACTOR}
        agent = agents[int(rng.integers(len(agents)))] if agents and ACTOR in roles and rng.random() < 0.7 else None
        people.append(PersonRecord(f"p{i}", f"P{i}", frozenset(roles), agent))
    titles, credits = [], []
    for t in range(int(rng.integers(0, max_titles + 1))):
        tid = f"t{t}"
        titles.append(TitleRecord(tid, tid, 2000 + t, "movie", ("drama",), "english", "usa", 90,
                                  int(rng.integers(0, 101)), 10, None, None, None, None))
        used = set()
        for p in people:
            for role in sorted(p.roles - {AGENT}):
                if rng.random() < 0.35 and (p.person_id, role) not in used:
                    used.add((p.person_id, role))
                    credits.append(CreditRecord(tid, p.person_id, role, len(used)))
    return Catalog(titles, people, credits)


def all_shortest_paths(adj, s, t):
    """Every shortest s-t path as a node list (BFS layering + DFS)."""
    n = len(adj)
    dist = [-1] * n
    dist[s] = 0
    q = deque([s])
    while q:
        v = q.popleft()
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                q.append(w)
    if dist[t] < 0:
        return []
    paths = []

    def extend(path):
        v = path[-1]
        if v == t:
            paths.append(list(path))
            return
        for w in adj[v]:
            if dist[w] == dist[v] + 1 and dist[w] <= dist[t]:
                path.append(w)
                extend(path)
                path.pop()

    extend([s])
    return paths


def brute_betweenness(adj, directed=True):
    n = len(adj)
    bc = np.zeros(n)
    pairs = itertools.permutations(range(n), 2) if directed else itertools.combinations(range(n), 2)
    for s, t in pairs:
        paths = all_shortest_paths(adj, s, t)
        if not paths:
            continue
        for v in range(n):
            if v in (s, t):
                continue
            bc[v] += sum(v in p for p in paths) / len(paths)
    return bc


def dense_components(a):
    n = a.shape[0]
    label = [-1] * n
    comps = []
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = len(comps)
        comp, stack = [s], [s]
        while stack:
            v = stack.pop()
            for w in np.flatnonzero(a[v]):
                if label[w] < 0:
                    label[w] = label[s]
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def dense_eigenvector(a):
    """Per-component principal eigenvector via ``eigh``, scaled by sqrt(size/n)."""
    n = a.shape[0]
    x = np.zeros(n)
    for comp in dense_components(a):
        sub = a[np.ix_(comp, comp)]
        vals, vecs = np.linalg.eigh(sub)
        v = np.abs(vecs[:, np.argmax(vals)])
        x[comp] = v / np.linalg.norm(v) * np.sqrt(len(comp) / n)
    return x


def dense_hits(a, tol=1e-14, max_iter=200000):
    """Authority iteration a <- A^T A a from the all-ones start, hubs from A a."""
    a = (a != 0).astype(float)
    n = a.shape[0]
    m = a.T @ a
    auth = a.T @ np.ones(n)
    auth /= np.linalg.norm(auth)
    for _ in range(max_iter):
        nxt = m @ auth
        nxt /= np.linalg.norm(nxt)
        if np.abs(nxt - auth).max() < tol:
            auth = nxt
            break
        auth = nxt
    hub = a @ auth
    return hub / np.linalg.norm(hub), auth


def floyd_warshall(a):
    n = a.shape[0]
    d = np.where(a != 0, 1.0, np.inf)
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def clustering_loop(a):
    """Local clustering by explicit neighbour-pair checks."""
    n = a.shape[0]
    out = np.zeros(n)
    for v in range(n):
        nb = np.flatnonzero(a[v])
        k = len(nb)
        if k < 2:
            continue
        links = sum(a[i, j] != 0 for i, j in itertools.combinations(nb, 2))
        out[v] = 2.0 * links / (k * (k - 1))
    return out


def best_split_bruteforce(X, y, n_classes):
    """Exhaustive gini split: (weighted impurity, feature, threshold)."""
    def gini(labels):
        if len(labels) == 0:
            return 0.0
        p = np.bincount(labels, minlength=n_classes) / len(labels)
        return 1.0 - float(np.sum(p ** 2))

    best = None
    n = len(y)
    for j in range(X.shape[1]):
        vals = np.unique(X[:, j])
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = (lo + hi) / 2
            left = y[X[:, j] <= thr]
            right = y[X[:, j] > thr]
            score = (len(left) * gini(left) + len(right) * gini(right)) / n
            cand = (round(score, 12), j, thr)
            if best is None or cand < best:
                best = cand
    return best


def finite_difference(f, x, eps=1e-6):
    """Central differences of scalar ``f`` w.r.t. every entry of array ``x`` (in place)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + eps
        fp = f()
        x[i] = old - eps
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * eps)
    return g


def max_relative_error(a, b, floor=1e-8):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)))
