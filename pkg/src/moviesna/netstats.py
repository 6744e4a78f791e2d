"""Network diagnostics: centralities, HITS, clustering, path lengths.

All path-based quantities are unweighted; edge weights count co-occurrences
and are not distances.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph


class ConvergenceError(RuntimeError):
    pass


@dataclass
class CentralityVector:
    kind: str
    nodes: list
    values: np.ndarray

    def __getitem__(self, nid):
        return float(self.values[self.nodes.index(nid)])

    def as_dict(self):
        return {n: float(v) for n, v in zip(self.nodes, self.values)}

    def top(self, k=5):
        order = sorted(range(len(self.nodes)), key=lambda i: (-self.values[i], self.nodes[i]))
        return [(self.nodes[i], float(self.values[i])) for i in order[:k]]


def _neighbor_lists(graph, directed):
    nodes = graph.nodes()
    if directed:
        _, a = graph.to_csr(nodes)
    else:
        _, a = graph.undirected_adjacency(nodes)
    adj = [a.indices[a.indptr[i]:a.indptr[i + 1]].tolist() for i in range(len(nodes))]
    return nodes, adj


def _brandes_from(sources, adj, n):
    bc = np.zeros(n)
    for s in sources:
        stack = []
        preds = [[] for _ in range(n)]
        sigma = [0] * n
        sigma[s] = 1
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    return bc


def betweenness(graph, directed=True, n_sources=None, seed=0, threads=1) -> CentralityVector:
    """Brandes betweenness over unweighted shortest paths, unnormalized.

    Directed mode counts ordered pairs; the undirected projection counts each
    unordered pair once.  With ``n_sources`` set, a uniform sample of source
    nodes is used and the accumulation is rescaled by ``n / n_sources``.
    """
    nodes, adj = _neighbor_lists(graph, directed)
    n = len(nodes)
    if n == 0:
        raise ValueError("betweenness needs a non-empty graph")
    sources = list(range(n))
    scale = 1.0
    if n_sources is not None and n_sources < n:
        rng = np.random.default_rng(seed)
        sources = sorted(rng.choice(n, size=n_sources, replace=False).tolist())
        scale = n / n_sources
    if threads > 1 and len(sources) > 1:
        chunks = [sources[i::threads] for i in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda c: _brandes_from(c, adj, n), chunks))
        bc = np.sum(parts, axis=0)
    else:
        bc = _brandes_from(sources, adj, n)
    if not directed:
        bc /= 2.0
    return CentralityVector("betweenness", nodes, bc * scale)


def _principal(mat, tol, max_iter, x0=None):
    """Unit principal eigenvector of a non-negative symmetric matrix by power
    iteration on ``mat + I`` (the shift removes the +/- tie on bipartite graphs)."""
    n = mat.shape[0]
    x = np.full(n, 1.0 / np.sqrt(n)) if x0 is None else x0 / np.linalg.norm(x0)
    for _ in range(max_iter):
        y = mat @ x + x
        norm = np.linalg.norm(y)
        if norm == 0:
            return x
        y /= norm
        if np.linalg.norm(y - x) < tol:
            return y
        x = y
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def eigenvector_centrality(graph, tol=1e-10, max_iter=10000) -> CentralityVector:
    """Principal eigenvector of the undirected projection, per component.

    Each weakly connected component gets its own unit eigenvector, scaled by
    sqrt(component size / n) so the full vector has unit norm.
    """
    nodes, a = graph.undirected_adjacency()
    n = len(nodes)
    if n == 0:
        raise ValueError("eigenvector_centrality needs a non-empty graph")
    n_comp, labels = csgraph.connected_components(a, directed=False)
    x = np.zeros(n)
    for c in range(n_comp):
        idx = np.flatnonzero(labels == c)
        sub = a[idx][:, idx]
        v = _principal(sub, tol, max_iter)
        x[idx] = np.abs(v) * np.sqrt(len(idx) / n)
    return CentralityVector("eigenvector", nodes, x)


def hits(graph, tol=1e-10, max_iter=10000):
    """Hub and authority scores by mutual reinforcement, L2-normalized.

    Edge weights are ignored.  Returns ``(hubs, authorities)``.
    """
    nodes, w = graph.to_csr()
    if w.nnz == 0:
        raise ValueError("HITS is undefined on a graph without edges")
    a = w.copy()
    a.data[:] = 1.0
    at = a.T.tocsr()
    n = len(nodes)
    h = np.full(n, 1.0 / np.sqrt(n))
    auth = at @ h
    auth /= np.linalg.norm(auth)
    for _ in range(max_iter):
        h_new = a @ auth
        h_new /= np.linalg.norm(h_new)
        a_new = at @ h_new
        a_new /= np.linalg.norm(a_new)
        err = np.linalg.norm(a_new - auth) + np.linalg.norm(h_new - h)
        h, auth = h_new, a_new
        if err < tol:
            return CentralityVector("hub", nodes, h), CentralityVector("authority", nodes, auth)
    raise ConvergenceError(f"HITS did not converge in {max_iter} iterations")


def local_clustering(graph):
    nodes, a = graph.undirected_adjacency()
    deg = np.asarray(a.sum(axis=1)).ravel()
    tri = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0
    denom = deg * (deg - 1)
    c = np.zeros(len(nodes))
    ok = deg >= 2
    c[ok] = 2.0 * tri[ok] / denom[ok]
    return nodes, c


def avg_clustering(graph) -> float:
    """Mean local clustering of the undirected projection (degree < 2 counts 0)."""
    nodes, c = local_clustering(graph)
    if not nodes:
        raise ValueError("avg_clustering needs a non-empty graph")
    return float(c.mean())


def avg_shortest_path(graph, sample_pairs=5000, seed=0, exact_limit=1000, directed=False) -> float:
    """Mean BFS distance inside the largest weakly connected component.

    Exact over all pairs when the component has at most ``exact_limit`` nodes,
    otherwise estimated from ``sample_pairs`` uniformly drawn pairs.  In
    directed mode unreachable pairs are skipped.
    """
    comp = graph.weakly_connected_components()
    if not comp or len(comp[0]) < 2:
        raise ValueError("largest component needs at least 2 nodes")
    members = comp[0]
    if directed:
        _, a = graph.to_csr(members)
    else:
        _, a = graph.undirected_adjacency(members)
    m = len(members)
    if m <= exact_limit:
        d = csgraph.shortest_path(a, directed=directed, unweighted=True)
        mask = ~np.eye(m, dtype=bool) & np.isfinite(d)
        return float(d[mask].mean())
    rng = np.random.default_rng(seed)
    src = rng.integers(0, m, size=sample_pairs)
    dst = (src + rng.integers(1, m, size=sample_pairs)) % m
    uniq, inv = np.unique(src, return_inverse=True)
    total, count = 0.0, 0
    for start in range(0, len(uniq), 256):
        block = uniq[start:start + 256]
        d = csgraph.shortest_path(a, directed=directed, unweighted=True, indices=block)
        sel = (inv >= start) & (inv < start + len(block))
        vals = d[inv[sel] - start, dst[sel]]
        vals = vals[np.isfinite(vals)]
        total += vals.sum()
        count += len(vals)
    return float(total / count)


def ccdf_slope(degrees, top_fraction=0.1):
    """Least-squares slope of log CCDF against log degree over the upper tail.

    The tail is the top ``top_fraction`` of distinct positive degrees (at least
    three points).  Negative slopes indicate a decaying heavy tail.
    """
    deg = np.asarray([d for d in degrees if d > 0], float)
    if len(deg) == 0:
        raise ValueError("no positive degrees")
    values = np.unique(deg)
    ccdf = np.array([(deg >= v).mean() for v in values])
    k = max(3, int(np.ceil(len(values) * top_fraction)))
    k = min(k, len(values))
    x = np.log(values[-k:])
    y = np.log(ccdf[-k:])
    if len(x) < 2 or np.ptp(x) == 0:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class GraphSummary:
    n_nodes: int
    n_edges: int
    avg_clustering: float
    avg_shortest_path: float
    n_components: int
    largest_component: int
    degree_ccdf_slope: float

    def items(self):
        return list(self.__dict__.items())


def node_table(graph, n_sources=None, seed=0, threads=1):
    """Per-node rows: node_id, kind, in/out degree, betweenness, eigenvector, hub, authority."""
    nodes = graph.nodes()
    bc = betweenness(graph, directed=True, n_sources=n_sources, seed=seed, threads=threads)
    ev = eigenvector_centrality(graph)
    hub, auth = hits(graph)
    rows = []
    for i, n in enumerate(nodes):
        rows.append((n, graph.kind(n), graph.degree(n, "in"), graph.degree(n, "out"),
                     float(bc.values[i]), float(ev.values[i]), float(hub.values[i]),
                     float(auth.values[i])))
    return rows


def summarize(graph, sample_pairs=5000, seed=0) -> GraphSummary:
    comps = graph.weakly_connected_components()
    degs = [graph.degree(n) for n in graph.nodes()]
    return GraphSummary(
        n_nodes=graph.n_nodes,
        n_edges=graph.n_edges,
        avg_clustering=avg_clustering(graph),
        avg_shortest_path=avg_shortest_path(graph, sample_pairs=sample_pairs, seed=seed),
        n_components=len(comps),
        largest_component=len(comps[0]) if comps else 0,
        degree_ccdf_slope=ccdf_slope(degs),
    )
