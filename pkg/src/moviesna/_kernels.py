"""Compiled inner loops for walks and skip-gram training.

Random numbers are always generated by the caller (numpy Generators) and
passed in, so results do not depend on numba's RNG or on thread scheduling
of the walk kernels.
"""

import numpy as np
from numba import config, njit, prange

# skip the TBB probe, which warns on hosts with an outdated TBB
config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@njit(cache=True)
def alias_setup(probs):
    """Vose alias table for a normalized probability vector."""
    k = probs.size
    scaled = probs * k
    prob = np.ones(k)
    alias = np.arange(k).astype(np.int32)
    small = np.empty(k, np.int64)
    large = np.empty(k, np.int64)
    ns = 0
    nl = 0
    for i in range(k):
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        nl -= 1
        g = large[nl]
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = scaled[g] + scaled[s] - 1.0
        if scaled[g] < 1.0:
            small[ns] = g
            ns += 1
        else:
            large[nl] = g
            nl += 1
    return prob, alias


@njit(cache=True)
def _is_adjacent(und_indptr, und_indices, u, x):
    lo = und_indptr[u]
    hi = und_indptr[u + 1]
    if hi == lo:
        return False
    j = lo + np.searchsorted(und_indices[lo:hi], x)
    return j < hi and und_indices[j] == x


@njit(cache=True)
def node_tables(indptr, weights):
    """First-step tables, aligned with CSR edge positions."""
    n = indptr.size - 1
    prob = np.ones(weights.size)
    alias = np.zeros(weights.size, np.int32)
    for u in range(n):
        lo = indptr[u]
        hi = indptr[u + 1]
        if hi > lo:
            w = weights[lo:hi] / weights[lo:hi].sum()
            pr, al = alias_setup(w)
            prob[lo:hi] = pr
            alias[lo:hi] = al
    return prob, alias


@njit(cache=True)
def biased_weights(indptr, indices, weights, und_indptr, und_indices, prev, cur, p, q):
    lo = indptr[cur]
    hi = indptr[cur + 1]
    out = np.empty(hi - lo)
    for k in range(hi - lo):
        x = indices[lo + k]
        if x == prev:
            a = 1.0 / p
        elif _is_adjacent(und_indptr, und_indices, prev, x):
            a = 1.0
        else:
            a = 1.0 / q
        out[k] = weights[lo + k] * a
    return out


@njit(cache=True)
def edge_tables(indptr, indices, weights, und_indptr, und_indices, p, q):
    """Second-order tables: one per directed edge (prev -> cur), over cur's out-edges."""
    n = indptr.size - 1
    m = indices.size
    offsets = np.zeros(m + 1, np.int64)
    for e in range(m):
        v = indices[e]
        offsets[e + 1] = offsets[e] + indptr[v + 1] - indptr[v]
    prob = np.ones(offsets[m])
    alias = np.zeros(offsets[m], np.int32)
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if indptr[v + 1] == indptr[v]:
                continue
            w = biased_weights(indptr, indices, weights, und_indptr, und_indices, u, v, p, q)
            pr, al = alias_setup(w / w.sum())
            prob[offsets[e]:offsets[e + 1]] = pr
            alias[offsets[e]:offsets[e + 1]] = al
    return offsets, prob, alias


@njit(cache=True)
def _one_walk(i, start, length, indptr, indices, n_prob, n_alias, e_off, e_prob, e_alias,
              uniforms, out):
    cur = start
    out[i, 0] = cur
    steps = 1
    prev_edge = -1
    while steps < length:
        lo = indptr[cur]
        deg = indptr[cur + 1] - lo
        if deg == 0:
            break
        u1 = uniforms[i, 2 * (steps - 1)]
        u2 = uniforms[i, 2 * (steps - 1) + 1]
        k = int(u1 * deg)
        if k >= deg:
            k = deg - 1
        if prev_edge < 0:
            pr = n_prob[lo + k]
            al = n_alias[lo + k]
        else:
            base = e_off[prev_edge]
            pr = e_prob[base + k]
            al = e_alias[base + k]
        if u2 >= pr:
            k = al
        prev_edge = lo + k
        cur = indices[prev_edge]
        out[i, steps] = cur
        steps += 1
    return steps


@njit(cache=True)
def walk_batch(starts, length, indptr, indices, n_prob, n_alias, e_off, e_prob, e_alias, uniforms):
    out = np.full((starts.size, length), -1, np.int32)
    lens = np.zeros(starts.size, np.int32)
    for i in range(starts.size):
        lens[i] = _one_walk(i, starts[i], length, indptr, indices, n_prob, n_alias,
                            e_off, e_prob, e_alias, uniforms, out)
    return out, lens


@njit(cache=True, parallel=True)
def walk_batch_parallel(starts, length, indptr, indices, n_prob, n_alias, e_off, e_prob,
                        e_alias, uniforms):
    out = np.full((starts.size, length), -1, np.int32)
    lens = np.zeros(starts.size, np.int32)
    for i in prange(starts.size):
        lens[i] = _one_walk(i, starts[i], length, indptr, indices, n_prob, n_alias,
                            e_off, e_prob, e_alias, uniforms, out)
    return out, lens


@njit(cache=True)
def _sigmoid(x):
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    z = np.exp(x)
    return z / (1.0 + z)


@njit(cache=True)
def pair_counts(lengths, window):
    out = np.zeros(lengths.size, np.int64)
    for w in range(lengths.size):
        n = lengths[w]
        total = 0
        for i in range(n):
            total += min(i, window) + min(n - 1 - i, window)
        out[w] = total
    return out


@njit(cache=True)
def sgns_pair(center, context, negatives, syn0, syn1, lr, neu1e):
    """One SGD step on -log s(u_o.v_c) - sum log s(-u_n.v_c); negatives equal to
    the context are skipped."""
    d = syn0.shape[1]
    for j in range(d):
        neu1e[j] = 0.0
    loss = 0.0
    for t in range(negatives.size + 1):
        if t == 0:
            target = context
            label = 1.0
        else:
            target = negatives[t - 1]
            if target == context:
                continue
            label = 0.0
        f = 0.0
        for j in range(d):
            f += syn0[center, j] * syn1[target, j]
        s = _sigmoid(f)
        loss -= np.log(s) if label == 1.0 else np.log(1.0 - s)
        g = (label - s) * lr
        for j in range(d):
            neu1e[j] += g * syn1[target, j]
            syn1[target, j] += g * syn0[center, j]
    for j in range(d):
        syn0[center, j] += neu1e[j]
    return loss


@njit(cache=True)
def _draw_negative(u, neg_prob, neg_alias):
    v = neg_prob.size
    x = u * v
    k = int(x)
    if k >= v:
        k = v - 1
    if x - k >= neg_prob[k]:
        k = neg_alias[k]
    return k


@njit(cache=True)
def _train_walk(w, tokens, starts, lengths, pair_off, window, n_neg, syn0, syn1,
                neg_u, neg_prob, neg_alias, lr0, lr_min, pairs_before, total_pairs, neu1e, negs):
    s = starts[w]
    n = lengths[w]
    k = pair_off[w]
    loss = 0.0
    for i in range(n):
        c = tokens[s + i]
        lo = max(0, i - window)
        hi = min(n - 1, i + window)
        for j in range(lo, hi + 1):
            if j == i:
                continue
            o = tokens[s + j]
            for t in range(n_neg):
                negs[t] = _draw_negative(neg_u[k * n_neg + t], neg_prob, neg_alias)
            progress = (pairs_before + k) / total_pairs
            lr = lr0 * (1.0 - progress)
            if lr < lr_min:
                lr = lr_min
            loss += sgns_pair(c, o, negs, syn0, syn1, lr, neu1e)
            k += 1
    return loss


@njit(cache=True)
def sgns_chunk(tokens, starts, lengths, pair_off, window, n_neg, syn0, syn1, neg_u,
               neg_prob, neg_alias, lr0, lr_min, pairs_before, total_pairs):
    neu1e = np.zeros(syn0.shape[1])
    negs = np.zeros(n_neg, np.int64)
    loss = 0.0
    for w in range(starts.size):
        loss += _train_walk(w, tokens, starts, lengths, pair_off, window, n_neg, syn0, syn1,
                            neg_u, neg_prob, neg_alias, lr0, lr_min, pairs_before, total_pairs,
                            neu1e, negs)
    return loss


@njit(cache=True, parallel=True)
def sgns_chunk_hogwild(tokens, starts, lengths, pair_off, window, n_neg, syn0, syn1, neg_u,
                       neg_prob, neg_alias, lr0, lr_min, pairs_before, total_pairs):
    # unsynchronized updates to syn0/syn1 across threads, by design
    losses = np.zeros(starts.size)
    for w in prange(starts.size):
        neu1e = np.zeros(syn0.shape[1])
        negs = np.zeros(n_neg, np.int64)
        losses[w] = _train_walk(w, tokens, starts, lengths, pair_off, window, n_neg, syn0, syn1,
                                neg_u, neg_prob, neg_alias, lr0, lr_min, pairs_before,
                                total_pairs, neu1e, negs)
    return losses.sum()
