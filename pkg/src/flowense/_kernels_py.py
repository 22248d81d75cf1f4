"""Pure numpy backend for the tree-growth kernels.

This is the reference implementation; the compiled Cython module in
``_kernels.pyx`` mirrors it operation for operation (same split rules, same
PRNG draws, same preorder node numbering), so trees grown under either
backend have identical structure up to floating-point roundoff in the
impurity arithmetic.

All growers return flat node arrays: ``feature`` is -1 at leaves, children
are node ids, ``value`` holds the leaf payload (class distribution, mean
target, or boosted leaf weight). Rows with ``x < threshold`` go left.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

GINI = 0
ENTROPY = 1

_MASK64 = (1 << 64) - 1
_IMPROVEMENT_EPS = 1e-12


class SplitMix64:
    """Tiny deterministic PRNG used for per-split draws inside tree growth.

    Implemented identically (same integer arithmetic) in the compiled
    backend so that feature subsets and random thresholds match exactly.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """First k entries of a partial Fisher-Yates shuffle of range(n)."""
        pool = list(range(n))
        for i in range(k):
            j = i + self.next_u64() % (n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def _class_impurity(counts: np.ndarray, total: float, criterion: int) -> float:
    if total <= 0.0:
        return 0.0
    p = counts / total
    if criterion == GINI:
        return float(1.0 - np.dot(p, p))
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p)))


def _best_exhaustive_split(col, y, w, counts, total_w, n_classes,
                           min_leaf, criterion):
    """Best (threshold, weighted child impurity) for one feature column.

    Candidate thresholds sit at midpoints between consecutive distinct
    sorted values; both children must hold >= min_leaf rows.
    """
    n = col.shape[0]
    order = np.argsort(col, kind="stable")
    sv = col[order]
    boundaries = np.nonzero(sv[:-1] < sv[1:])[0]
    if boundaries.size == 0:
        return None
    left_ok = boundaries + 1 >= min_leaf
    right_ok = n - boundaries - 1 >= min_leaf
    boundaries = boundaries[left_ok & right_ok]
    if boundaries.size == 0:
        return None
    thresholds = 0.5 * (sv[boundaries] + sv[boundaries + 1])
    keep = thresholds > sv[boundaries]  # guard against midpoint rounding down
    boundaries = boundaries[keep]
    thresholds = thresholds[keep]
    if boundaries.size == 0:
        return None

    sw = w[order]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y[order]] = sw
    cum_counts = np.cumsum(onehot, axis=0)
    cum_w = np.cumsum(sw)

    lc = cum_counts[boundaries]
    lw = cum_w[boundaries]
    rc = counts - lc
    rw = total_w - lw
    lw_safe = np.where(lw > 0.0, lw, 1.0)
    rw_safe = np.where(rw > 0.0, rw, 1.0)
    pl = lc / lw_safe[:, None]
    pr = rc / rw_safe[:, None]
    if criterion == GINI:
        il = 1.0 - np.sum(pl * pl, axis=1)
        ir = 1.0 - np.sum(pr * pr, axis=1)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            il = -np.sum(np.where(pl > 0.0, pl * np.log2(pl), 0.0), axis=1)
            ir = -np.sum(np.where(pr > 0.0, pr * np.log2(pr), 0.0), axis=1)
    child = (lw * il + rw * ir) / total_w
    best = int(np.argmin(child))
    return float(thresholds[best]), float(child[best])


def _partition_impurity(col, thr, y, w, counts, total_w, n_classes,
                        min_leaf, criterion):
    """Weighted child impurity of the partition ``col < thr`` (or None)."""
    mask = col < thr
    nl = int(np.count_nonzero(mask))
    nr = col.shape[0] - nl
    if nl < min_leaf or nr < min_leaf:
        return None
    lc = np.bincount(y[mask], weights=w[mask], minlength=n_classes)
    lw = float(lc.sum())
    rc = counts - lc
    rw = total_w - lw
    child = (lw * _class_impurity(lc, lw, criterion)
             + rw * _class_impurity(rc, rw, criterion)) / total_w
    return child


def grow_cart(X, y, sample_weight, n_classes, criterion, max_depth,
              min_samples_leaf, min_samples_split, max_features,
              random_thresholds, seed):
    """Grow a classification tree.

    ``max_features`` is the per-split candidate subset size (== n_features
    for plain CART); ``random_thresholds`` switches to the extra-trees rule
    of one uniform threshold per candidate feature instead of the exhaustive
    midpoint scan.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    w = np.asarray(sample_weight, dtype=np.float64)
    n, d = X.shape
    rng = SplitMix64(seed)

    feature, threshold, left, right, value, n_node = [], [], [], [], [], []
    stack = [(np.arange(n), 0, -1, False)]  # rows, depth, parent, is_left

    while stack:
        rows, depth, parent, is_left = stack.pop()
        node_id = len(feature)
        if parent >= 0:
            if is_left:
                left[parent] = node_id
            else:
                right[parent] = node_id
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        n_node.append(rows.shape[0])

        yr = y[rows]
        wr = w[rows]
        counts = np.bincount(yr, weights=wr, minlength=n_classes)
        total_w = float(counts.sum())
        value.append(counts / total_w if total_w > 0.0 else
                     np.full(n_classes, 1.0 / n_classes))
        imp = _class_impurity(counts, total_w, criterion)

        n_rows = rows.shape[0]
        if (depth >= max_depth or n_rows < min_samples_split
                or n_rows < 2 * min_samples_leaf or imp <= 0.0):
            continue

        if max_features >= d:
            candidates = range(d)
        else:
            candidates = sorted(rng.sample_without_replacement(d, max_features))

        best_feat = -1
        best_thr = 0.0
        best_child = np.inf
        Xr = X[rows]
        for f in candidates:
            col = Xr[:, f]
            if random_thresholds:
                vmin = float(col.min())
                vmax = float(col.max())
                if vmin >= vmax:
                    continue
                thr = vmin + rng.next_double() * (vmax - vmin)
                res = _partition_impurity(col, thr, yr, wr, counts, total_w,
                                          n_classes, min_samples_leaf,
                                          criterion)
                if res is None:
                    continue
                child = res
                if child < best_child:
                    best_feat, best_thr, best_child = f, thr, child
            else:
                res = _best_exhaustive_split(col, yr, wr, counts, total_w,
                                             n_classes, min_samples_leaf,
                                             criterion)
                if res is None:
                    continue
                thr, child = res
                if child < best_child:
                    best_feat, best_thr, best_child = f, thr, child

        # Accept splits that do not increase impurity (the XOR pattern needs
        # zero-improvement root splits); recursion still terminates because
        # both children are strictly smaller.
        if best_feat < 0 or best_child > imp + _IMPROVEMENT_EPS:
            continue

        mask = Xr[:, best_feat] < best_thr
        feature[node_id] = best_feat
        threshold[node_id] = best_thr
        stack.append((rows[~mask], depth + 1, node_id, False))
        stack.append((rows[mask], depth + 1, node_id, True))

    return (np.asarray(feature, dtype=np.int64),
            np.asarray(threshold, dtype=np.float64),
            np.asarray(left, dtype=np.int64),
            np.asarray(right, dtype=np.int64),
            np.asarray(value, dtype=np.float64),
            np.asarray(n_node, dtype=np.int64))


def grow_regression(X, t, friedman, max_depth, min_samples_leaf,
                    min_samples_split):
    """Grow a regression tree on targets ``t`` (used by boosting stages).

    Splits are ranked by squared-error reduction, or by the Friedman
    improvement ``nl*nr/(nl+nr) * (mean_l - mean_r)^2`` when ``friedman``
    is set. Also returns the leaf id each training row lands in.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    n, d = X.shape

    feature, threshold, left, right, value, n_node = [], [], [], [], [], []
    leaf_of_row = np.full(n, -1, dtype=np.int64)
    stack = [(np.arange(n), 0, -1, False)]

    while stack:
        rows, depth, parent, is_left = stack.pop()
        node_id = len(feature)
        if parent >= 0:
            if is_left:
                left[parent] = node_id
            else:
                right[parent] = node_id
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        n_node.append(rows.shape[0])

        tr = t[rows]
        n_rows = rows.shape[0]
        mean = float(tr.mean())
        value.append(mean)
        sse = float(np.sum((tr - mean) ** 2))

        if (depth >= max_depth or n_rows < min_samples_split
                or n_rows < 2 * min_samples_leaf):
            leaf_of_row[rows] = node_id
            continue

        best_feat = -1
        best_thr = 0.0
        best_score = 0.0
        Xr = X[rows]
        for f in range(d):
            col = Xr[:, f]
            order = np.argsort(col, kind="stable")
            sv = col[order]
            boundaries = np.nonzero(sv[:-1] < sv[1:])[0]
            if boundaries.size == 0:
                continue
            ok = ((boundaries + 1 >= min_samples_leaf)
                  & (n_rows - boundaries - 1 >= min_samples_leaf))
            boundaries = boundaries[ok]
            if boundaries.size == 0:
                continue
            thresholds = 0.5 * (sv[boundaries] + sv[boundaries + 1])
            keep = thresholds > sv[boundaries]
            boundaries = boundaries[keep]
            thresholds = thresholds[keep]
            if boundaries.size == 0:
                continue

            st = tr[order]
            cum = np.cumsum(st)
            cum2 = np.cumsum(st * st)
            total = cum[-1]
            nl = (boundaries + 1).astype(np.float64)
            nr = n_rows - nl
            sl = cum[boundaries]
            if friedman:
                diff = sl / nl - (total - sl) / nr
                score = (nl * nr) / (nl + nr) * diff * diff
            else:
                sse_l = cum2[boundaries] - sl * sl / nl
                sse_r = (cum2[-1] - cum2[boundaries]
                         - (total - sl) ** 2 / nr)
                score = sse - sse_l - sse_r
            b = int(np.argmax(score))
            if score[b] > best_score:
                best_feat = f
                best_thr = float(thresholds[b])
                best_score = float(score[b])

        if best_feat < 0:
            leaf_of_row[rows] = node_id
            continue

        mask = Xr[:, best_feat] < best_thr
        feature[node_id] = best_feat
        threshold[node_id] = best_thr
        stack.append((rows[~mask], depth + 1, node_id, False))
        stack.append((rows[mask], depth + 1, node_id, True))

    return (np.asarray(feature, dtype=np.int64),
            np.asarray(threshold, dtype=np.float64),
            np.asarray(left, dtype=np.int64),
            np.asarray(right, dtype=np.int64),
            np.asarray(value, dtype=np.float64),
            np.asarray(n_node, dtype=np.int64),
            leaf_of_row)


def grow_xgb(X, g, h, reg_lambda, gamma, min_child_weight, max_depth):
    """Grow a second-order boosted tree on gradient/hessian arrays.

    Leaf weight is -G/(H+lambda); a split is kept only when
    gain = 0.5*[GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)] - gamma is positive
    and both children satisfy H_child >= min_child_weight.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    n, d = X.shape

    feature, threshold, left, right, value, n_node = [], [], [], [], [], []
    stack = [(np.arange(n), 0, -1, False)]

    while stack:
        rows, depth, parent, is_left = stack.pop()
        node_id = len(feature)
        if parent >= 0:
            if is_left:
                left[parent] = node_id
            else:
                right[parent] = node_id
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        n_node.append(rows.shape[0])

        gr = g[rows]
        hr = h[rows]
        G = float(gr.sum())
        H = float(hr.sum())
        value.append(-G / (H + reg_lambda))

        n_rows = rows.shape[0]
        if depth >= max_depth or n_rows < 2:
            continue

        parent_term = G * G / (H + reg_lambda)
        best_feat = -1
        best_thr = 0.0
        best_gain = 0.0
        Xr = X[rows]
        for f in range(d):
            col = Xr[:, f]
            order = np.argsort(col, kind="stable")
            sv = col[order]
            boundaries = np.nonzero(sv[:-1] < sv[1:])[0]
            if boundaries.size == 0:
                continue
            thresholds = 0.5 * (sv[boundaries] + sv[boundaries + 1])
            keep = thresholds > sv[boundaries]
            boundaries = boundaries[keep]
            thresholds = thresholds[keep]
            if boundaries.size == 0:
                continue

            cg = np.cumsum(gr[order])
            ch = np.cumsum(hr[order])
            gl = cg[boundaries]
            hl = ch[boundaries]
            gr_ = G - gl
            hr_ = H - hl
            ok = (hl >= min_child_weight) & (hr_ >= min_child_weight)
            if not np.any(ok):
                continue
            gain = 0.5 * (gl * gl / (hl + reg_lambda)
                          + gr_ * gr_ / (hr_ + reg_lambda)
                          - parent_term) - gamma
            gain = np.where(ok, gain, -np.inf)
            b = int(np.argmax(gain))
            if gain[b] > best_gain:
                best_feat = f
                best_thr = float(thresholds[b])
                best_gain = float(gain[b])

        if best_feat < 0:
            continue

        mask = Xr[:, best_feat] < best_thr
        feature[node_id] = best_feat
        threshold[node_id] = best_thr
        stack.append((rows[~mask], depth + 1, node_id, False))
        stack.append((rows[mask], depth + 1, node_id, True))

    return (np.asarray(feature, dtype=np.int64),
            np.asarray(threshold, dtype=np.float64),
            np.asarray(left, dtype=np.int64),
            np.asarray(right, dtype=np.int64),
            np.asarray(value, dtype=np.float64),
            np.asarray(n_node, dtype=np.int64))
