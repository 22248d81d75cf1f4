# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled backend for the tree-growth kernels.

Mirrors ``_kernels_py`` exactly: same splitmix64 draws, same preorder node
numbering, same split-acceptance rules, so both backends grow structurally
identical trees (floating-point summation order is the only difference).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, log2
from libc.stdint cimport int64_t, uint64_t
from libcpp.pair cimport pair
from libcpp.vector cimport vector

cnp.import_array()

BACKEND = "cython"

GINI = 0
ENTROPY = 1

DEF IMPROVEMENT_EPS = 1e-12


cdef struct Rng:
    uint64_t state


cdef inline uint64_t rng_next_u64(Rng* rng) nogil:
    rng.state += <uint64_t>0x9E3779B97F4A7C15
    cdef uint64_t z = rng.state
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double rng_next_double(Rng* rng) nogil:
    return (rng_next_u64(rng) >> 11) * (2.0 ** -53)


cdef struct Task:
    int64_t start
    int64_t end
    int64_t depth
    int64_t parent
    int is_left


cdef inline double class_impurity(double* counts, int n_classes,
                                  double total, int criterion) nogil:
    cdef double acc = 0.0
    cdef double p
    cdef int c
    if total <= 0.0:
        return 0.0
    if criterion == GINI:
        for c in range(n_classes):
            p = counts[c] / total
            acc += p * p
        return 1.0 - acc
    for c in range(n_classes):
        p = counts[c] / total
        if p > 0.0:
            acc -= p * log2(p)
    return acc


def grow_cart(X, y, sample_weight, int n_classes, int criterion,
              int max_depth, int min_samples_leaf, int min_samples_split,
              int max_features, int random_thresholds, seed):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef int64_t[:] yv = np.ascontiguousarray(y, dtype=np.int64)
    cdef double[:] wv = np.ascontiguousarray(sample_weight, dtype=np.float64)
    cdef int64_t n = Xv.shape[0]
    cdef int64_t d = Xv.shape[1]
    cdef Rng rng
    rng.state = <uint64_t>(int(seed) & ((1 << 64) - 1))

    cdef int64_t cap = 2 * n - 1 if n > 1 else 1
    feature_np = np.full(cap, -1, dtype=np.int64)
    threshold_np = np.zeros(cap, dtype=np.float64)
    left_np = np.full(cap, -1, dtype=np.int64)
    right_np = np.full(cap, -1, dtype=np.int64)
    value_np = np.zeros((cap, n_classes), dtype=np.float64)
    n_node_np = np.zeros(cap, dtype=np.int64)
    cdef int64_t[:] feature = feature_np
    cdef double[:] threshold = threshold_np
    cdef int64_t[:] left = left_np
    cdef int64_t[:] right = right_np
    cdef double[:, ::1] value = value_np
    cdef int64_t[:] n_node = n_node_np

    rows_np = np.arange(n, dtype=np.int64)
    cdef int64_t[:] rows = rows_np
    scratch_np = np.empty(n, dtype=np.int64)
    cdef int64_t[:] scratch = scratch_np
    counts_np = np.zeros(n_classes, dtype=np.float64)
    cdef double[:] counts = counts_np
    run_np = np.zeros(n_classes, dtype=np.float64)
    cdef double[:] run = run_np
    pool_np = np.empty(d, dtype=np.int64)
    cdef int64_t[:] pool = pool_np

    cdef vector[Task] stack
    cdef vector[pair[double, int64_t]] order
    cdef Task task
    cdef int64_t node_id = 0
    cdef int64_t n_rows, i, j, k, f, r, nl, best_boundary
    cdef int64_t n_cand, ci, tmp
    cdef double total_w, imp, best_child, best_thr, child
    cdef double vmin, vmax, thr, lw, rw, v_i, v_next, sw_run
    cdef int c, use_all

    task.start = 0
    task.end = n
    task.depth = 0
    task.parent = -1
    task.is_left = 0
    stack.push_back(task)

    while stack.size() > 0:
        task = stack.back()
        stack.pop_back()
        if task.parent >= 0:
            if task.is_left:
                left[task.parent] = node_id
            else:
                right[task.parent] = node_id
        n_rows = task.end - task.start
        n_node[node_id] = n_rows

        total_w = 0.0
        for c in range(n_classes):
            counts[c] = 0.0
        for i in range(task.start, task.end):
            r = rows[i]
            counts[yv[r]] += wv[r]
            total_w += wv[r]
        if total_w > 0.0:
            for c in range(n_classes):
                value[node_id, c] = counts[c] / total_w
        else:
            for c in range(n_classes):
                value[node_id, c] = 1.0 / n_classes
        imp = class_impurity(&counts[0], n_classes, total_w, criterion)

        if (task.depth >= max_depth or n_rows < min_samples_split
                or n_rows < 2 * min_samples_leaf or imp <= 0.0):
            node_id += 1
            continue

        use_all = max_features >= d
        if use_all:
            n_cand = d
            for i in range(d):
                pool[i] = i
        else:
            n_cand = max_features
            for i in range(d):
                pool[i] = i
            for i in range(n_cand):
                j = i + <int64_t>(rng_next_u64(&rng) % <uint64_t>(d - i))
                tmp = pool[i]
                pool[i] = pool[j]
                pool[j] = tmp
            # ascending scan order, matching sorted() in the fallback
            for i in range(1, n_cand):
                tmp = pool[i]
                j = i - 1
                while j >= 0 and pool[j] > tmp:
                    pool[j + 1] = pool[j]
                    j -= 1
                pool[j + 1] = tmp

        best_child = INFINITY
        best_thr = 0.0
        k = -1  # best feature

        for ci in range(n_cand):
            f = pool[ci]
            if random_thresholds:
                vmin = INFINITY
                vmax = -INFINITY
                for i in range(task.start, task.end):
                    v_i = Xv[rows[i], f]
                    if v_i < vmin:
                        vmin = v_i
                    if v_i > vmax:
                        vmax = v_i
                if vmin >= vmax:
                    continue
                thr = vmin + rng_next_double(&rng) * (vmax - vmin)
                nl = 0
                lw = 0.0
                for c in range(n_classes):
                    run[c] = 0.0
                for i in range(task.start, task.end):
                    r = rows[i]
                    if Xv[r, f] < thr:
                        nl += 1
                        run[yv[r]] += wv[r]
                        lw += wv[r]
                if nl < min_samples_leaf or n_rows - nl < min_samples_leaf:
                    continue
                child = lw * class_impurity(&run[0], n_classes, lw, criterion)
                rw = total_w - lw
                for c in range(n_classes):
                    run[c] = counts[c] - run[c]
                child += rw * class_impurity(&run[0], n_classes, rw, criterion)
                child /= total_w
                if child < best_child:
                    k = f
                    best_thr = thr
                    best_child = child
            else:
                order.clear()
                for i in range(task.start, task.end):
                    r = rows[i]
                    order.push_back(pair[double, int64_t](Xv[r, f], r))
                _sort_pairs(order)
                for c in range(n_classes):
                    run[c] = 0.0
                sw_run = 0.0
                for i in range(n_rows - 1):
                    r = order[i].second
                    run[yv[r]] += wv[r]
                    sw_run += wv[r]
                    v_i = order[i].first
                    v_next = order[i + 1].first
                    if v_i >= v_next:
                        continue
                    if i + 1 < min_samples_leaf or n_rows - i - 1 < min_samples_leaf:
                        continue
                    thr = 0.5 * (v_i + v_next)
                    if thr <= v_i:
                        continue
                    lw = sw_run
                    rw = total_w - lw
                    child = lw * class_impurity(&run[0], n_classes, lw, criterion)
                    for c in range(n_classes):
                        counts[c] -= run[c]
                    child += rw * class_impurity(&counts[0], n_classes, rw, criterion)
                    for c in range(n_classes):
                        counts[c] += run[c]
                    child /= total_w
                    if child < best_child:
                        k = f
                        best_thr = thr
                        best_child = child

        if k < 0 or best_child > imp + IMPROVEMENT_EPS:
            node_id += 1
            continue

        feature[node_id] = k
        threshold[node_id] = best_thr
        nl = _stable_partition(Xv, rows, scratch, task.start, task.end, k, best_thr)

        task_right = Task(start=task.start + nl, end=task.end,
                          depth=task.depth + 1, parent=node_id, is_left=0)
        task_left = Task(start=task.start, end=task.start + nl,
                         depth=task.depth + 1, parent=node_id, is_left=1)
        stack.push_back(task_right)
        stack.push_back(task_left)
        node_id += 1

    return (feature_np[:node_id].copy(), threshold_np[:node_id].copy(),
            left_np[:node_id].copy(), right_np[:node_id].copy(),
            value_np[:node_id].copy(), n_node_np[:node_id].copy())


cdef void _sort_pairs(vector[pair[double, int64_t]]& order) noexcept nogil:
    # std::sort on (value, row) pairs; tie order is irrelevant because
    # candidate thresholds sit only between distinct values.
    cdef extern from "<algorithm>" namespace "std" nogil:
        void sort[Iter](Iter first, Iter last)
    sort(order.begin(), order.end())


cdef int64_t _stable_partition(double[:, ::1] Xv, int64_t[:] rows,
                               int64_t[:] scratch, int64_t start, int64_t end,
                               int64_t feat, double thr) noexcept nogil:
    """Reorder rows[start:end] so that rows with x < thr come first,
    preserving relative order on both sides. Returns the left count."""
    cdef int64_t i, r
    cdef int64_t nl = 0
    cdef int64_t nr = 0
    for i in range(start, end):
        r = rows[i]
        if Xv[r, feat] < thr:
            rows[start + nl] = r
            nl += 1
        else:
            scratch[nr] = r
            nr += 1
    for i in range(nr):
        rows[start + nl + i] = scratch[i]
    return nl


def grow_regression(X, t, int friedman, int max_depth, int min_samples_leaf,
                    int min_samples_split):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef int64_t n = Xv.shape[0]
    cdef int64_t d = Xv.shape[1]

    cdef int64_t cap = 2 * n - 1 if n > 1 else 1
    feature_np = np.full(cap, -1, dtype=np.int64)
    threshold_np = np.zeros(cap, dtype=np.float64)
    left_np = np.full(cap, -1, dtype=np.int64)
    right_np = np.full(cap, -1, dtype=np.int64)
    value_np = np.zeros(cap, dtype=np.float64)
    n_node_np = np.zeros(cap, dtype=np.int64)
    leaf_of_row_np = np.full(n, -1, dtype=np.int64)
    cdef int64_t[:] feature = feature_np
    cdef double[:] threshold = threshold_np
    cdef int64_t[:] left = left_np
    cdef int64_t[:] right = right_np
    cdef double[:] value = value_np
    cdef int64_t[:] n_node = n_node_np
    cdef int64_t[:] leaf_of_row = leaf_of_row_np

    rows_np = np.arange(n, dtype=np.int64)
    cdef int64_t[:] rows = rows_np
    scratch_np = np.empty(n, dtype=np.int64)
    cdef int64_t[:] scratch = scratch_np

    cdef vector[Task] stack
    cdef vector[pair[double, int64_t]] order
    cdef Task task
    cdef int64_t node_id = 0
    cdef int64_t n_rows, i, r, f, k, nl
    cdef double mean, sse, total, s_run, s2_run, diff
    cdef double best_thr, best_score, score, thr, v_i, v_next
    cdef double sl, nl_f, nr_f, sse_l, sse_r, s2_total

    task.start = 0
    task.end = n
    task.depth = 0
    task.parent = -1
    task.is_left = 0
    stack.push_back(task)

    while stack.size() > 0:
        task = stack.back()
        stack.pop_back()
        if task.parent >= 0:
            if task.is_left:
                left[task.parent] = node_id
            else:
                right[task.parent] = node_id
        n_rows = task.end - task.start
        n_node[node_id] = n_rows

        total = 0.0
        for i in range(task.start, task.end):
            total += tv[rows[i]]
        mean = total / n_rows
        value[node_id] = mean
        sse = 0.0
        for i in range(task.start, task.end):
            diff = tv[rows[i]] - mean
            sse += diff * diff

        if (task.depth >= max_depth or n_rows < min_samples_split
                or n_rows < 2 * min_samples_leaf):
            for i in range(task.start, task.end):
                leaf_of_row[rows[i]] = node_id
            node_id += 1
            continue

        best_score = 0.0
        best_thr = 0.0
        k = -1

        for f in range(d):
            order.clear()
            for i in range(task.start, task.end):
                r = rows[i]
                order.push_back(pair[double, int64_t](Xv[r, f], r))
            _sort_pairs(order)
            s_run = 0.0
            s2_run = 0.0
            s2_total = 0.0
            for i in range(n_rows):
                v_i = tv[order[i].second]
                s2_total += v_i * v_i
            for i in range(n_rows - 1):
                v_i = tv[order[i].second]
                s_run += v_i
                s2_run += v_i * v_i
                if order[i].first >= order[i + 1].first:
                    continue
                if i + 1 < min_samples_leaf or n_rows - i - 1 < min_samples_leaf:
                    continue
                thr = 0.5 * (order[i].first + order[i + 1].first)
                if thr <= order[i].first:
                    continue
                nl_f = i + 1.0
                nr_f = n_rows - i - 1.0
                sl = s_run
                if friedman:
                    diff = sl / nl_f - (total - sl) / nr_f
                    score = (nl_f * nr_f) / (nl_f + nr_f) * diff * diff
                else:
                    sse_l = s2_run - sl * sl / nl_f
                    sse_r = (s2_total - s2_run
                             - (total - sl) * (total - sl) / nr_f)
                    score = sse - sse_l - sse_r
                if score > best_score:
                    k = f
                    best_thr = thr
                    best_score = score

        if k < 0:
            for i in range(task.start, task.end):
                leaf_of_row[rows[i]] = node_id
            node_id += 1
            continue

        feature[node_id] = k
        threshold[node_id] = best_thr
        nl = _stable_partition(Xv, rows, scratch, task.start, task.end, k, best_thr)
        task_right = Task(start=task.start + nl, end=task.end,
                          depth=task.depth + 1, parent=node_id, is_left=0)
        task_left = Task(start=task.start, end=task.start + nl,
                         depth=task.depth + 1, parent=node_id, is_left=1)
        stack.push_back(task_right)
        stack.push_back(task_left)
        node_id += 1

    return (feature_np[:node_id].copy(), threshold_np[:node_id].copy(),
            left_np[:node_id].copy(), right_np[:node_id].copy(),
            value_np[:node_id].copy(), n_node_np[:node_id].copy(),
            leaf_of_row_np)


def grow_xgb(X, g, h, double reg_lambda, double gamma,
             double min_child_weight, int max_depth):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef double[:] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef int64_t n = Xv.shape[0]
    cdef int64_t d = Xv.shape[1]

    cdef int64_t cap = 2 * n - 1 if n > 1 else 1
    feature_np = np.full(cap, -1, dtype=np.int64)
    threshold_np = np.zeros(cap, dtype=np.float64)
    left_np = np.full(cap, -1, dtype=np.int64)
    right_np = np.full(cap, -1, dtype=np.int64)
    value_np = np.zeros(cap, dtype=np.float64)
    n_node_np = np.zeros(cap, dtype=np.int64)
    cdef int64_t[:] feature = feature_np
    cdef double[:] threshold = threshold_np
    cdef int64_t[:] left = left_np
    cdef int64_t[:] right = right_np
    cdef double[:] value = value_np
    cdef int64_t[:] n_node = n_node_np

    rows_np = np.arange(n, dtype=np.int64)
    cdef int64_t[:] rows = rows_np
    scratch_np = np.empty(n, dtype=np.int64)
    cdef int64_t[:] scratch = scratch_np

    cdef vector[Task] stack
    cdef vector[pair[double, int64_t]] order
    cdef Task task
    cdef int64_t node_id = 0
    cdef int64_t n_rows, i, r, f, k, nl
    cdef double G, H, parent_term, gl, hl, gr, hr
    cdef double best_thr, best_gain, gain, thr

    task.start = 0
    task.end = n
    task.depth = 0
    task.parent = -1
    task.is_left = 0
    stack.push_back(task)

    while stack.size() > 0:
        task = stack.back()
        stack.pop_back()
        if task.parent >= 0:
            if task.is_left:
                left[task.parent] = node_id
            else:
                right[task.parent] = node_id
        n_rows = task.end - task.start
        n_node[node_id] = n_rows

        G = 0.0
        H = 0.0
        for i in range(task.start, task.end):
            r = rows[i]
            G += gv[r]
            H += hv[r]
        value[node_id] = -G / (H + reg_lambda)

        if task.depth >= max_depth or n_rows < 2:
            node_id += 1
            continue

        parent_term = G * G / (H + reg_lambda)
        best_gain = 0.0
        best_thr = 0.0
        k = -1

        for f in range(d):
            order.clear()
            for i in range(task.start, task.end):
                r = rows[i]
                order.push_back(pair[double, int64_t](Xv[r, f], r))
            _sort_pairs(order)
            gl = 0.0
            hl = 0.0
            for i in range(n_rows - 1):
                r = order[i].second
                gl += gv[r]
                hl += hv[r]
                if order[i].first >= order[i + 1].first:
                    continue
                thr = 0.5 * (order[i].first + order[i + 1].first)
                if thr <= order[i].first:
                    continue
                gr = G - gl
                hr = H - hl
                if hl < min_child_weight or hr < min_child_weight:
                    continue
                gain = 0.5 * (gl * gl / (hl + reg_lambda)
                              + gr * gr / (hr + reg_lambda)
                              - parent_term) - gamma
                if gain > best_gain:
                    k = f
                    best_thr = thr
                    best_gain = gain

        if k < 0:
            node_id += 1
            continue

        feature[node_id] = k
        threshold[node_id] = best_thr
        nl = _stable_partition(Xv, rows, scratch, task.start, task.end, k, best_thr)
        task_right = Task(start=task.start + nl, end=task.end,
                          depth=task.depth + 1, parent=node_id, is_left=0)
        task_left = Task(start=task.start, end=task.start + nl,
                         depth=task.depth + 1, parent=node_id, is_left=1)
        stack.push_back(task_right)
        stack.push_back(task_left)
        node_id += 1

    return (feature_np[:node_id].copy(), threshold_np[:node_id].copy(),
            left_np[:node_id].copy(), right_np[:node_id].copy(),
            value_np[:node_id].copy(), n_node_np[:node_id].copy())
