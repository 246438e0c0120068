"""Compiled split search and tree growth.

Trees are stored as flat node arrays: ``feature`` (-1 for leaves),
``threshold``, ``left``, ``right`` and ``value``.  Node 0 is the root.
Samples go left when ``x[feature] <= threshold``.

Split search is exact.  Every node owns one contiguous segment of each
feature's presorted row order (``idx[f, a:b]``); splitting a node stably
partitions those segments, so the children stay sorted.  Every midpoint
between consecutive distinct values inside a node is a candidate.  A
candidate replaces the current best only if its gain is larger by more than
``TIE_RTOL`` relative, so among (near-)ties the lowest feature index and then
the lowest threshold win.
"""
import numpy as np
from numba import njit

TIE_RTOL = 1e-10
# a split must remove more than this fraction of the node's sum of squares
MIN_GAIN_RTOL = 1e-12


@njit(cache=True)
def _better(gain, best):
    if best == -np.inf:
        return gain > best
    return gain > best + TIE_RTOL * abs(best)


@njit(cache=True)
def _node_best(XT, idx, r, a, b, min_leaf, inv):
    """Best split of the node owning segment ``[a, b)``.

    Returns ``(gain, feature, threshold)``; feature is -1 when no admissible
    split exists.  Gain is the drop in the sum of squared residuals.
    """
    n_feat = XT.shape[0]
    m = b - a
    tot_s = 0.0
    tot_sq = 0.0
    for k in range(a, b):
        v = r[idx[0, k]]
        tot_s += v
        tot_sq += v * v
    best_gain = -np.inf
    best_f = -1
    best_thr = 0.0
    inv_m = inv[m]
    for f in range(n_feat):
        sl = 0.0
        nl = 0
        last_x = 0.0
        for k in range(a, b):
            s = idx[f, k]
            x = XT[f, s]
            if nl >= min_leaf and x > last_x:
                nr = m - nl
                if nr < min_leaf:
                    break
                sr = tot_s - sl
                diff = sl * inv[nl] - sr * inv[nr]
                gain = (nl * nr) * inv_m * diff * diff
                if _better(gain, best_gain):
                    best_gain = gain
                    best_f = f
                    thr = 0.5 * (last_x + x)
                    # adjacent floats: keep x on the right-hand side
                    best_thr = thr if thr < x else last_x
            sl += r[s]
            nl += 1
            last_x = x
    if best_f >= 0 and not (best_gain > 0.0 and best_gain > MIN_GAIN_RTOL * tot_sq):
        best_f = -1
    return best_gain, best_f, best_thr


@njit(cache=True)
def _partition(XT, idx, a, b, f_split, thr, flag, buf):
    """Stable partition of every feature's segment; returns the left size."""
    n_left = 0
    for k in range(a, b):
        s = idx[0, k]
        go = XT[f_split, s] <= thr
        flag[s] = go
        if go:
            n_left += 1
    for f in range(idx.shape[0]):
        li = a
        ri = a + n_left
        for k in range(a, b):
            s = idx[f, k]
            if flag[s]:
                buf[li] = s
                li += 1
            else:
                buf[ri] = s
                ri += 1
        for k in range(a, b):
            idx[f, k] = buf[k]
    return n_left


@njit(cache=True)
def _finish(XT, r, n_nodes, feature, threshold, left, right, value, leaf_of):
    """Route training rows to leaves and set leaf values to residual means."""
    n = XT.shape[1]
    sums = np.zeros(n_nodes)
    counts = np.zeros(n_nodes)
    for s in range(n):
        nd = 0
        while feature[nd] >= 0:
            if XT[feature[nd], s] <= threshold[nd]:
                nd = left[nd]
            else:
                nd = right[nd]
        leaf_of[s] = nd
        sums[nd] += r[s]
        counts[nd] += 1.0
    for nd in range(n_nodes):
        if feature[nd] < 0 and counts[nd] > 0:
            value[nd] = sums[nd] / counts[nd]


@njit(cache=True)
def _reset(order, idx, feature, threshold, left, right, value):
    for f in range(order.shape[0]):
        for k in range(order.shape[1]):
            idx[f, k] = order[f, k]
    for nd in range(feature.shape[0]):
        feature[nd] = -1
        threshold[nd] = 0.0
        left[nd] = -1
        right[nd] = -1
        value[nd] = 0.0


@njit(cache=True)
def grow_level_wise(XT, order, idx, r, max_depth, min_leaf, min_split, inv,
                    feature, threshold, left, right, value, leaf_of, flag, buf):
    """Expand every frontier node per depth level. Returns the node count."""
    n = XT.shape[1]
    cap = feature.shape[0]
    _reset(order, idx, feature, threshold, left, right, value)
    seg_a = np.zeros(cap, dtype=np.int64)
    seg_b = np.zeros(cap, dtype=np.int64)
    seg_b[0] = n
    n_nodes = 1
    lo, hi = 0, 1
    for depth in range(max_depth):
        new_lo = n_nodes
        for nd in range(lo, hi):
            a, b = seg_a[nd], seg_b[nd]
            m = b - a
            if m < min_split or m < 2 * min_leaf:
                continue
            gain, f, thr = _node_best(XT, idx, r, a, b, min_leaf, inv)
            if f < 0:
                continue
            # children of the last level are never scanned
            if depth + 1 < max_depth:
                n_left = _partition(XT, idx, a, b, f, thr, flag, buf)
            else:
                n_left = 0
            feature[nd] = f
            threshold[nd] = thr
            left[nd] = n_nodes
            right[nd] = n_nodes + 1
            seg_a[n_nodes] = a
            seg_b[n_nodes] = a + n_left
            seg_a[n_nodes + 1] = a + n_left
            seg_b[n_nodes + 1] = b
            n_nodes += 2
        if n_nodes == new_lo:
            break
        lo, hi = new_lo, n_nodes
    _finish(XT, r, n_nodes, feature, threshold, left, right, value, leaf_of)
    return n_nodes


@njit(cache=True)
def grow_leaf_wise(XT, order, idx, r, max_depth, max_leaves, min_leaf, min_split, inv,
                   feature, threshold, left, right, value, leaf_of, flag, buf):
    """Repeatedly split the leaf with the largest gain. Returns the node count."""
    n = XT.shape[1]
    cap = feature.shape[0]
    _reset(order, idx, feature, threshold, left, right, value)
    seg_a = np.zeros(cap, dtype=np.int64)
    seg_b = np.zeros(cap, dtype=np.int64)
    seg_b[0] = n
    depth_of = np.zeros(cap, dtype=np.int64)
    cand_gain = np.full(cap, -np.inf)
    cand_feat = np.full(cap, -1, dtype=np.int64)
    cand_thr = np.zeros(cap)
    if max_depth > 0 and n >= min_split and n >= 2 * min_leaf:
        cand_gain[0], cand_feat[0], cand_thr[0] = _node_best(XT, idx, r, 0, n, min_leaf, inv)
    n_nodes = 1
    n_leaves = 1
    while n_leaves < max_leaves:
        pick = -1
        for nd in range(n_nodes):
            if feature[nd] < 0 and cand_feat[nd] >= 0:
                if pick < 0 or _better(cand_gain[nd], cand_gain[pick]):
                    pick = nd
        if pick < 0:
            break
        a, b = seg_a[pick], seg_b[pick]
        if n_leaves + 1 < max_leaves and depth_of[pick] + 1 < max_depth:
            n_left = _partition(XT, idx, a, b, cand_feat[pick], cand_thr[pick], flag, buf)
        else:
            n_left = 0
        feature[pick] = cand_feat[pick]
        threshold[pick] = cand_thr[pick]
        cand_feat[pick] = -1
        lc, rc = n_nodes, n_nodes + 1
        left[pick] = lc
        right[pick] = rc
        seg_a[lc], seg_b[lc] = a, a + n_left
        seg_a[rc], seg_b[rc] = a + n_left, b
        depth_of[lc] = depth_of[pick] + 1
        depth_of[rc] = depth_of[pick] + 1
        n_nodes += 2
        n_leaves += 1
        if n_leaves >= max_leaves:
            break
        for c in (lc, rc):
            m = seg_b[c] - seg_a[c]
            if depth_of[c] < max_depth and m >= min_split and m >= 2 * min_leaf:
                cand_gain[c], cand_feat[c], cand_thr[c] = _node_best(XT, idx, r, seg_a[c], seg_b[c], min_leaf, inv)
    _finish(XT, r, n_nodes, feature, threshold, left, right, value, leaf_of)
    return n_nodes


@njit(cache=True)
def boost_many(XT, order, Y, learning_rate, n_estimators, max_depth, leaf_wise, max_leaves,
               min_leaf, min_split, cap):
    """Squared-loss boosting of one ensemble per column of ``Y``.

    ``XT`` is the feature matrix transposed (features x rows) and ``order``
    its per-feature stable argsort.  Returns ``(base, feature, threshold,
    left, right, value, n_trees)`` with tree arrays shaped
    ``(n_outputs, n_estimators, cap)``.  Fitting stops early for an output
    once a tree cannot split: later trees would be the same single leaf.
    """
    n, n_out = Y.shape
    base = np.zeros(n_out)
    feature = np.full((n_out, n_estimators, cap), -1, dtype=np.int64)
    threshold = np.zeros((n_out, n_estimators, cap))
    left = np.full((n_out, n_estimators, cap), -1, dtype=np.int64)
    right = np.full((n_out, n_estimators, cap), -1, dtype=np.int64)
    value = np.zeros((n_out, n_estimators, cap))
    n_trees = np.zeros(n_out, dtype=np.int64)
    idx = np.empty_like(order)
    leaf_of = np.zeros(n, dtype=np.int64)
    flag = np.zeros(n, dtype=np.bool_)
    buf = np.zeros(n, dtype=np.int64)
    inv = np.empty(n + 1)
    inv[0] = 0.0
    for c in range(1, n + 1):
        inv[c] = 1.0 / c
    r = np.empty(n)
    for o in range(n_out):
        mean = 0.0
        for s in range(n):
            mean += Y[s, o]
        mean /= n
        base[o] = mean
        for s in range(n):
            r[s] = Y[s, o] - mean
        for t in range(n_estimators):
            if leaf_wise:
                nn = grow_leaf_wise(XT, order, idx, r, max_depth, max_leaves, min_leaf, min_split, inv,
                                    feature[o, t], threshold[o, t], left[o, t], right[o, t],
                                    value[o, t], leaf_of, flag, buf)
            else:
                nn = grow_level_wise(XT, order, idx, r, max_depth, min_leaf, min_split, inv,
                                     feature[o, t], threshold[o, t], left[o, t], right[o, t],
                                     value[o, t], leaf_of, flag, buf)
            n_trees[o] = t + 1
            for s in range(n):
                r[s] -= learning_rate * value[o, t, leaf_of[s]]
            if nn == 1:
                break
    return base, feature, threshold, left, right, value, n_trees


@njit(cache=True)
def predict_trees(X, base, learning_rate, feature, threshold, left, right, value, n_trees):
    """Evaluate one ensemble (tree arrays shaped ``(n_trees_cap, cap)``)."""
    q = X.shape[0]
    out = np.full(q, base)
    for i in range(q):
        acc = 0.0
        for t in range(n_trees):
            nd = 0
            while feature[t, nd] >= 0:
                if X[i, feature[t, nd]] <= threshold[t, nd]:
                    nd = left[t, nd]
                else:
                    nd = right[t, nd]
            acc += value[t, nd]
        out[i] += learning_rate * acc
    return out
