"""Compiled tree-growing and traversal kernels.

Trees are stored as flat parallel arrays indexed by node id:
``feature`` (-1 for leaves), ``threshold``, ``left``, ``right`` and ``value``.
A sample goes left when ``x[feature] <= threshold``.
"""

import numpy as np
from numba import njit

LEAF = -1

# Relative slack when comparing split scores, so float noise never decides a split.
_SCORE_EPS = 1e-12


@njit(cache=True, nogil=True)
def _midpoint(lo, hi):
    mid = 0.5 * (lo + hi)
    if mid >= hi:
        mid = lo
    return mid


@njit(cache=True, nogil=True)
def gini_best_split(x_col, y, min_leaf):
    """Best Gini split of one feature column.

    Returns ``(weighted_impurity, threshold, n_left)``; ``n_left == 0`` when no
    valid split exists. The weighted impurity is ``n_l * G_l + n_r * G_r``.
    """
    n = x_col.shape[0]
    order = np.argsort(x_col, kind="mergesort")
    total_pos = 0.0
    for i in range(n):
        total_pos += y[i]
    best = np.inf
    best_thr = 0.0
    best_left = 0
    left_pos = 0.0
    for i in range(1, n):
        left_pos += y[order[i - 1]]
        lo = x_col[order[i - 1]]
        hi = x_col[order[i]]
        if i < min_leaf or n - i < min_leaf or not lo < hi:
            continue
        nl = float(i)
        nr = float(n - i)
        right_pos = total_pos - left_pos
        gl = nl - (left_pos * left_pos + (nl - left_pos) * (nl - left_pos)) / nl
        gr = nr - (right_pos * right_pos + (nr - right_pos) * (nr - right_pos)) / nr
        score = gl + gr
        if score < best - _SCORE_EPS * (1.0 + abs(best)) or best_left == 0:
            best = score
            best_thr = _midpoint(lo, hi)
            best_left = i
    return best, best_thr, best_left


@njit(cache=True, nogil=True)
def _partition(X, idx, start, end, feat, thr):
    i = start
    j = end - 1
    while i <= j:
        if X[idx[i], feat] <= thr:
            i += 1
        else:
            tmp = idx[i]
            idx[i] = idx[j]
            idx[j] = tmp
            j -= 1
    return i


@njit(cache=True, nogil=True)
def grow_classification_tree(X, y, sample_idx, feature_keys, max_depth, min_leaf, max_features):
    """Grow a Gini tree on ``X[sample_idx]`` (duplicates allowed).

    ``feature_keys[node]`` ranks the candidate features at that node; the first
    ``max_features`` non-constant ones are searched. ``max_depth < 0`` means
    unbounded. Leaf ``value`` is the Laplace-smoothed P(y == 1).
    """
    n = sample_idx.shape[0]
    n_features = X.shape[1]
    cap = 2 * n + 1
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, LEAF, dtype=np.int64)
    right = np.full(cap, LEAF, dtype=np.int64)
    value = np.zeros(cap)
    n_samples = np.zeros(cap, dtype=np.int64)
    depth_of = np.zeros(cap, dtype=np.int64)

    idx = sample_idx.copy()
    stack_node = np.empty(cap, dtype=np.int64)
    stack_start = np.empty(cap, dtype=np.int64)
    stack_end = np.empty(cap, dtype=np.int64)
    top = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n
    top = 1
    n_nodes = 1

    col = np.empty(n)
    ysub = np.empty(n)
    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        m = end - start
        pos = 0.0
        for i in range(start, end):
            pos += y[idx[i]]
        n_samples[node] = m
        value[node] = (pos + 1.0) / (m + 2.0)
        depth = depth_of[node]
        if pos == 0.0 or pos == m or m < 2 * min_leaf:
            continue
        if max_depth >= 0 and depth >= max_depth:
            continue

        for i in range(m):
            ysub[i] = y[idx[start + i]]
        order = np.argsort(feature_keys[node], kind="mergesort")
        visited = 0
        best = np.inf
        best_feat = -1
        best_thr = 0.0
        for r in range(n_features):
            f = order[r]
            cmin = np.inf
            cmax = -np.inf
            for i in range(m):
                v = X[idx[start + i], f]
                col[i] = v
                if v < cmin:
                    cmin = v
                if v > cmax:
                    cmax = v
            if not cmin < cmax:
                continue
            visited += 1
            score, thr, nl = gini_best_split(col[:m], ysub[:m], min_leaf)
            if nl > 0:
                better = score < best - _SCORE_EPS * (1.0 + abs(best))
                tie = abs(score - best) <= _SCORE_EPS * (1.0 + abs(best))
                if best_feat < 0 or better or (tie and f < best_feat):
                    best = score
                    best_feat = f
                    best_thr = thr
            if visited >= max_features:
                break
        if best_feat < 0:
            continue

        mid = _partition(X, idx, start, end, best_feat, best_thr)
        feature[node] = best_feat
        threshold[node] = best_thr
        l_id = n_nodes
        r_id = n_nodes + 1
        n_nodes += 2
        left[node] = l_id
        right[node] = r_id
        depth_of[l_id] = depth + 1
        depth_of[r_id] = depth + 1
        # Push right first so the left subtree is grown first.
        stack_node[top] = r_id
        stack_start[top] = mid
        stack_end[top] = end
        top += 1
        stack_node[top] = l_id
        stack_start[top] = start
        stack_end[top] = mid
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy(), n_samples[:n_nodes].copy(),
            depth_of[:n_nodes].copy())


@njit(cache=True, nogil=True)
def sse_best_split(x_col, g, min_leaf):
    """Best squared-error split of one column for targets ``g``.

    Returns ``(gain_proxy, threshold, n_left)`` where the proxy
    ``S_l^2 / n_l + S_r^2 / n_r`` is maximised.
    """
    n = x_col.shape[0]
    order = np.argsort(x_col, kind="mergesort")
    total = 0.0
    for i in range(n):
        total += g[i]
    best = -np.inf
    best_thr = 0.0
    best_left = 0
    s_left = 0.0
    for i in range(1, n):
        s_left += g[order[i - 1]]
        lo = x_col[order[i - 1]]
        hi = x_col[order[i]]
        if i < min_leaf or n - i < min_leaf or not lo < hi:
            continue
        s_right = total - s_left
        proxy = s_left * s_left / i + s_right * s_right / (n - i)
        if proxy > best + _SCORE_EPS * (1.0 + abs(best)) or best_left == 0:
            best = proxy
            best_thr = _midpoint(lo, hi)
            best_left = i
    return best, best_thr, best_left


@njit(cache=True, nogil=True)
def grow_newton_tree(X, grad, hess, max_depth, min_leaf):
    """Grow a regression tree on targets ``grad`` with Newton leaf values.

    Every feature is searched at every node. A leaf's value is
    ``sum(grad) / sum(hess)`` over its samples (0 when the hessian sum vanishes).
    """
    n = X.shape[0]
    n_features = X.shape[1]
    cap = 2 * n + 1
    if max_depth >= 0:
        cap = min(cap, 2 ** (max_depth + 1))
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, LEAF, dtype=np.int64)
    right = np.full(cap, LEAF, dtype=np.int64)
    value = np.zeros(cap)
    n_samples = np.zeros(cap, dtype=np.int64)
    depth_of = np.zeros(cap, dtype=np.int64)

    idx = np.arange(n)
    stack_node = np.empty(cap, dtype=np.int64)
    stack_start = np.empty(cap, dtype=np.int64)
    stack_end = np.empty(cap, dtype=np.int64)
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n
    top = 1
    n_nodes = 1
    col = np.empty(n)
    gsub = np.empty(n)
    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        m = end - start
        sg = 0.0
        sh = 0.0
        for i in range(start, end):
            sg += grad[idx[i]]
            sh += hess[idx[i]]
        n_samples[node] = m
        value[node] = sg / sh if sh > 1e-300 else 0.0
        depth = depth_of[node]
        if m < 2 * min_leaf or (max_depth >= 0 and depth >= max_depth):
            continue
        parent_proxy = sg * sg / m
        for i in range(m):
            gsub[i] = grad[idx[start + i]]
        best = -np.inf
        best_feat = -1
        best_thr = 0.0
        for f in range(n_features):
            for i in range(m):
                col[i] = X[idx[start + i], f]
            proxy, thr, nl = sse_best_split(col[:m], gsub[:m], min_leaf)
            if nl > 0 and (best_feat < 0 or proxy > best + _SCORE_EPS * (1.0 + abs(best))):
                best = proxy
                best_feat = f
                best_thr = thr
        if best_feat < 0 or not best > parent_proxy + _SCORE_EPS * (1.0 + abs(parent_proxy)):
            continue
        mid = _partition(X, idx, start, end, best_feat, best_thr)
        feature[node] = best_feat
        threshold[node] = best_thr
        l_id = n_nodes
        r_id = n_nodes + 1
        n_nodes += 2
        left[node] = l_id
        right[node] = r_id
        depth_of[l_id] = depth + 1
        depth_of[r_id] = depth + 1
        stack_node[top] = r_id
        stack_start[top] = mid
        stack_end[top] = end
        top += 1
        stack_node[top] = l_id
        stack_start[top] = start
        stack_end[top] = mid
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy(), n_samples[:n_nodes].copy(),
            depth_of[:n_nodes].copy())


@njit(cache=True, nogil=True)
def tree_apply(X, feature, threshold, left, right):
    """Leaf id reached by each row of ``X``."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feature[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out
