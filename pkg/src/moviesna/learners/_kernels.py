"""Compiled tree builders: exact-threshold CART and histogram boosting trees."""

import numpy as np
from numba import njit


@njit(cache=True)
def _gini_sum(counts, total):
    # total * gini = total - sum(c^2) / total
    s = 0.0
    for c in counts:
        s += c * c
    return total - s / total


@njit(cache=True)
def _best_split_feature(X, y, idx, start, end, j, n_classes, min_leaf, left, right):
    """Lowest weighted-gini midpoint threshold on feature j; returns (score, thr, ok)."""
    n = end - start
    vals = np.empty(n)
    for t in range(n):
        vals[t] = X[idx[start + t], j]
    order = np.argsort(vals, kind="mergesort")
    for c in range(n_classes):
        left[c] = 0.0
        right[c] = 0.0
    for t in range(n):
        right[y[idx[start + t]]] += 1.0
    best = np.inf
    best_thr = 0.0
    found = False
    for t in range(n - 1):
        cls = y[idx[start + order[t]]]
        left[cls] += 1.0
        right[cls] -= 1.0
        v0 = vals[order[t]]
        v1 = vals[order[t + 1]]
        if v1 <= v0:
            continue
        nl = t + 1
        nr = n - nl
        if nl < min_leaf or nr < min_leaf:
            continue
        score = _gini_sum(left, nl) + _gini_sum(right, nr)
        if score < best:
            best = score
            thr = 0.5 * (v0 + v1)
            if thr >= v1:
                thr = v0
            best_thr = thr
            found = True
    return best, best_thr, found


@njit(cache=True)
def build_cart(X, y, idx, n_classes, max_depth, min_leaf, max_features, seed):
    """Grow a gini CART over rows ``idx`` (duplicates allowed, as in bootstrap).

    At each node features are visited in random order until ``max_features``
    non-constant ones have been scored; the winner is the lowest score, ties
    going to the lower feature index and then the lower threshold.
    Returns arrays (feature, threshold, left, right, value).
    """
    np.random.seed(seed)
    n = idx.size
    f = X.shape[1]
    cap = 2 * n + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap)
    child_l = np.full(cap, -1, np.int64)
    child_r = np.full(cap, -1, np.int64)
    value = np.zeros((cap, n_classes))
    idx = idx.copy()
    left = np.zeros(n_classes)
    right = np.zeros(n_classes)
    # stack of (node, start, end, depth)
    stack = np.zeros((cap, 4), np.int64)
    sp = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    sp = 1
    n_nodes = 1
    while sp > 0:
        sp -= 1
        node = stack[sp, 0]
        start = stack[sp, 1]
        end = stack[sp, 2]
        depth = stack[sp, 3]
        cnt = end - start
        for t in range(start, end):
            value[node, y[idx[t]]] += 1.0
        pure = False
        for c in range(n_classes):
            if value[node, c] == cnt:
                pure = True
        for c in range(n_classes):
            value[node, c] /= cnt
        if pure or depth >= max_depth or cnt < 2 * min_leaf:
            continue
        perm = np.random.permutation(f)
        best = np.inf
        best_f = -1
        best_thr = 0.0
        visited = 0
        for r in range(f):
            if visited >= max_features:
                break
            j = perm[r]
            constant = True
            v0 = X[idx[start], j]
            for t in range(start + 1, end):
                if X[idx[t], j] != v0:
                    constant = False
                    break
            if constant:
                continue
            visited += 1
            score, thr, ok = _best_split_feature(X, y, idx, start, end, j, n_classes, min_leaf,
                                                 left, right)
            if not ok:
                continue
            if (score < best or (score == best and j < best_f)
                    or (score == best and j == best_f and thr < best_thr)):
                best = score
                best_f = j
                best_thr = thr
        if best_f < 0:
            continue
        # partition idx[start:end] by x <= thr
        lo = start
        hi = end - 1
        while lo <= hi:
            if X[idx[lo], best_f] <= best_thr:
                lo += 1
            else:
                tmp = idx[lo]
                idx[lo] = idx[hi]
                idx[hi] = tmp
                hi -= 1
        feature[node] = best_f
        threshold[node] = best_thr
        child_l[node] = n_nodes
        child_r[node] = n_nodes + 1
        stack[sp, 0] = n_nodes + 1
        stack[sp, 1] = lo
        stack[sp, 2] = end
        stack[sp, 3] = depth + 1
        sp += 1
        stack[sp, 0] = n_nodes
        stack[sp, 1] = start
        stack[sp, 2] = lo
        stack[sp, 3] = depth + 1
        sp += 1
        n_nodes += 2
    return (feature[:n_nodes], threshold[:n_nodes], child_l[:n_nodes], child_r[:n_nodes],
            value[:n_nodes])


@njit(cache=True)
def apply_tree(X, feature, threshold, child_l, child_r):
    out = np.empty(X.shape[0], np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = child_l[node]
            else:
                node = child_r[node]
        out[i] = node
    return out


@njit(cache=True)
def build_hist_tree(Xb, n_bins, g, h, depth, l2, min_leaf):
    """Depth-limited Newton regression tree on binned features, heap layout.

    Node k has children 2k+1, 2k+2.  ``split_bin[k] = -1`` marks a leaf.
    Returns (split_feature, split_bin, leaf_value) where leaf values are the
    unscaled Newton steps ``-G / (H + l2)``.
    """
    n, f = Xb.shape
    size = 2 ** (depth + 1) - 1
    split_f = np.full(size, -1, np.int64)
    split_b = np.full(size, -1, np.int64)
    G = np.zeros(size)
    H = np.zeros(size)
    C = np.zeros(size, np.int64)
    node_of = np.zeros(n, np.int64)
    for i in range(n):
        G[0] += g[i]
        H[0] += h[i]
    C[0] = n
    active = np.zeros(size, np.bool_)
    active[0] = True
    for level in range(depth):
        first = 2 ** level - 1
        width = 2 ** level
        hg = np.zeros((width, f, n_bins))
        hh = np.zeros((width, f, n_bins))
        hc = np.zeros((width, f, n_bins), np.int64)
        any_active = False
        for k in range(width):
            if active[first + k]:
                any_active = True
        if not any_active:
            break
        for i in range(n):
            k = node_of[i] - first
            if k < 0 or not active[node_of[i]]:
                continue
            for j in range(f):
                b = Xb[i, j]
                hg[k, j, b] += g[i]
                hh[k, j, b] += h[i]
                hc[k, j, b] += 1
        for k in range(width):
            node = first + k
            if not active[node]:
                continue
            Gt = G[node]
            Ht = H[node]
            parent = Gt * Gt / (Ht + l2)
            best = 1e-12
            bf = -1
            bb = -1
            for j in range(f):
                gl = 0.0
                hl = 0.0
                cl = 0
                for b in range(n_bins - 1):
                    gl += hg[k, j, b]
                    hl += hh[k, j, b]
                    cl += hc[k, j, b]
                    cr = C[node] - cl
                    if cl < min_leaf or cr < min_leaf:
                        continue
                    gr = Gt - gl
                    hr = Ht - hl
                    gain = gl * gl / (hl + l2) + gr * gr / (hr + l2) - parent
                    if gain > best:
                        best = gain
                        bf = j
                        bb = b
            if bf < 0:
                continue
            split_f[node] = bf
            split_b[node] = bb
            for c in (2 * node + 1, 2 * node + 2):
                active[c] = True
        # route samples and accumulate child sums
        for i in range(n):
            node = node_of[i]
            if node < first or split_b[node] < 0:
                continue
            if Xb[i, split_f[node]] <= split_b[node]:
                c = 2 * node + 1
            else:
                c = 2 * node + 2
            node_of[i] = c
            G[c] += g[i]
            H[c] += h[i]
            C[c] += 1
    value = np.zeros(size)
    for k in range(size):
        if C[k] > 0:
            value[k] = -G[k] / (H[k] + l2)
    return split_f, split_b, value
