"""Exact greedy binary-tree induction shared by tree, forest, and booster.

The grower is level-batched: all nodes of one depth are evaluated together
on flat arrays. For every feature it keeps the active rows grouped by node
(segments) and sorted by feature value inside each segment, so split
scoring is a handful of segmented cumulative sums and the per-node Python
overhead stays constant no matter how many nodes a level has. Sorted
orders are maintained by stable partitioning, so the input is sorted only
once (and that presort can be shared across trees).

Two criteria are supported:

* classification: minimize weighted Gini impurity; leaf values are the
  weighted class distribution. A node splits whenever a valid candidate
  exists and the node is impure (a zero-gain split is allowed: it can
  still enable useful splits below, e.g. on XOR-like data).
* grad/hess regression (boosting): maximize the second-order gain
  0.5*[GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam)] - gamma with leaf
  weight -G/(H+lam); a node splits only when the best gain is positive.

Candidate thresholds are midpoints between consecutive distinct sorted
values; rows go left iff x[feature] <= threshold. Ties are broken toward
the lowest feature index, then the lowest threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Tree:
    """Flat array representation of a binary decision tree.

    feature[i] == -1 marks a leaf; internal nodes route rows left iff
    x[feature[i]] <= threshold[i]. value[i] holds the node's output
    vector (class distribution, or a single boosting leaf weight).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node id for every row of X."""
        n = X.shape[0]
        node = np.zeros(n, dtype=np.int32)
        if n == 0:
            return node
        internal = self.feature[node] >= 0
        rows = np.arange(n)
        while internal.any():
            f = np.where(internal, self.feature[node], 0)
            xv = X[rows, f]
            go_left = xv <= self.threshold[node]
            nxt = np.where(go_left, self.left[node], self.right[node])
            node = np.where(internal, nxt, node)
            internal = self.feature[node] >= 0
        return node

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def presort_columns(X: np.ndarray) -> np.ndarray:
    """(n, d) int32 matrix whose column f sorts X[:, f] ascending (stable)."""
    return np.argsort(X, axis=0, kind="stable").astype(np.int32)


def _seg_cumsum(v: np.ndarray, starts: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Inclusive cumulative sum of v, restarting at every segment start."""
    cs = np.cumsum(v)
    base = np.where(starts > 0, cs[starts - 1], 0.0)
    return cs - np.repeat(base, sizes)


class _NodeStore:
    """Growable flat tree arrays; node 0 is the root."""

    def __init__(self, n_outputs: int):
        self.feature = [-1]
        self.threshold = [np.nan]
        self.left = [-1]
        self.right = [-1]
        self.n_outputs = n_outputs
        self.value: list[np.ndarray | None] = [None]

    def new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(np.nan)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(None)
        return len(self.feature) - 1

    def finish(self) -> Tree:
        values = np.vstack([
            v if v is not None else np.zeros(self.n_outputs) for v in self.value
        ])
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            value=values,
        )


def _best_splits_for_feature(xs, starts, sizes, seg_id, score, extra_valid,
                             positions=None):
    """Shared tail of split scoring: validity mask, per-segment argmax.

    Returns (best_score, local_boundary_index) per segment; segments with
    no valid candidate get -inf / -1.
    """
    m = xs.shape[0]
    ends = starts + sizes
    valid = np.zeros(m, dtype=bool)
    if m > 1:
        np.greater(xs[1:], xs[:-1], out=valid[:-1])
    valid[ends - 1] = False
    valid &= extra_valid
    score = np.where(valid, score, -np.inf)
    seg_best = np.maximum.reduceat(score, starts)
    hit = valid & (score == seg_best[seg_id])
    if positions is None:
        positions = np.arange(m)
    cand = np.where(hit, positions, m)
    first = np.minimum.reduceat(cand, starts)
    found = seg_best > -np.inf
    local = np.where(found, first - starts, -1)
    return np.where(found, seg_best, -np.inf), local


def _midpoint_thresholds(xs, starts, local):
    """Split threshold for each segment's chosen boundary.

    Midpoint of the straddling values; if rounding pushes the midpoint up
    to the higher value (adjacent floats), fall back to the lower value so
    "x <= threshold" still separates the two.
    """
    pos = starts + np.maximum(local, 0)
    lo = xs[pos]
    hi = xs[np.minimum(pos + 1, xs.shape[0] - 1)]
    mid = lo + (hi - lo) / 2.0
    return np.where(mid < hi, mid, lo)


class _Level:
    """Active rows of one tree depth, segment-grouped and value-sorted."""

    __slots__ = ("orders", "sizes", "node_ids")

    def __init__(self, orders, sizes, node_ids):
        self.orders = orders          # list of d int32 arrays, same layout
        self.sizes = sizes            # rows per segment
        self.node_ids = node_ids      # tree node per segment

    @property
    def n_segments(self) -> int:
        return self.sizes.shape[0]

    def starts(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.sizes)[:-1])).astype(np.int64)

    def seg_id(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_segments), self.sizes)

    def filter_segments(self, keep: np.ndarray) -> "_Level":
        if keep.all():
            return self
        pos_keep = np.repeat(keep, self.sizes)
        return _Level(
            orders=[o[pos_keep] for o in self.orders],
            sizes=self.sizes[keep],
            node_ids=self.node_ids[keep],
        )


def _partition_level(level: _Level, row_side: np.ndarray, left_counts: np.ndarray,
                     store: _NodeStore, best_feat, best_thr) -> _Level:
    """Split every segment of the level into (left, right) child segments."""
    sizes = level.sizes
    right_counts = sizes - left_counts
    starts = level.starts()

    child_ids = np.empty((level.n_segments, 2), dtype=np.int32)
    for s in range(level.n_segments):
        node = level.node_ids[s]
        lid = store.new_node()
        rid = store.new_node()
        store.feature[node] = int(best_feat[s])
        store.threshold[node] = float(best_thr[s])
        store.left[node] = lid
        store.right[node] = rid
        child_ids[s, 0] = lid
        child_ids[s, 1] = rid

    lc_starts = np.concatenate(([0], np.cumsum(left_counts)[:-1]))
    rc_starts = np.concatenate(([0], np.cumsum(right_counts)[:-1]))
    new_orders = []
    for order in level.orders:
        mask = row_side[order]
        lefts = order[mask]
        rights = order[~mask]
        new_order = np.empty_like(order)
        pos_l = np.arange(lefts.shape[0]) + np.repeat(starts - lc_starts, left_counts)
        pos_r = np.arange(rights.shape[0]) + np.repeat(starts + left_counts - rc_starts,
                                                       right_counts)
        new_order[pos_l] = lefts
        new_order[pos_r] = rights
        new_orders.append(new_order)

    new_sizes = np.empty(level.n_segments * 2, dtype=np.int64)
    new_sizes[0::2] = left_counts
    new_sizes[1::2] = right_counts
    return _Level(new_orders, new_sizes, child_ids.reshape(-1))


def _per_segment_feature_subsets(rng, n_segments: int, d: int, mtry: int) -> np.ndarray:
    """Independent random feature subsets, one row per segment."""
    base = np.tile(np.arange(d), (n_segments, 1))
    return rng.permuted(base, axis=1)[:, :mtry]


def grow_classification_tree(X, y, n_classes, *, max_depth=12, min_samples_leaf=5,
                             sample_weight=None, max_features=None, rng=None,
                             presort=None, return_leaf_assignment=False):
    """CART with the weighted Gini criterion.

    y holds class indices in [0, n_classes). sample_weight (if given)
    carries bootstrap multiplicities: rows with zero weight are excluded,
    and min_samples_leaf counts weighted rows. max_features enables
    per-split feature subsampling and needs an rng. Pass a shared
    `presort` (from presort_columns) when growing many trees on one X.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    K = int(n_classes)
    if sample_weight is None:
        w = np.ones(n)
        active = None
    else:
        w = np.asarray(sample_weight, dtype=np.float64)
        active = w > 0
    mtry = d if max_features is None else int(max_features)
    if not 1 <= mtry <= d:
        raise ValueError(f"max_features must be in [1, {d}], got {max_features}")
    if mtry < d and rng is None:
        raise ValueError("feature subsampling requires an rng")

    if presort is None:
        presort = presort_columns(X)
    orders = []
    for f in range(d):
        col = presort[:, f]
        orders.append(col[active[col]] if active is not None else col.copy())
    m = orders[0].shape[0]
    if m == 0:
        raise ValueError("no rows with positive weight")

    store = _NodeStore(K)
    leaf_assign = np.zeros(n, dtype=np.int32) if return_leaf_assignment else None
    level = _Level(orders, np.array([m], dtype=np.int64), np.array([0], dtype=np.int32))
    min_w = float(min_samples_leaf)
    depth = 0

    while level.n_segments:
        starts = level.starts()
        seg_id = level.seg_id()
        pos0 = level.orders[0]
        S = level.n_segments

        ys0 = y[pos0]
        ws0 = w[pos0]
        class_tot = np.bincount(seg_id * K + ys0, weights=ws0,
                                minlength=S * K).reshape(S, K)
        w_tot = class_tot.sum(axis=1)
        sq_tot = (class_tot ** 2).sum(axis=1)
        for s in range(S):
            store.value[level.node_ids[s]] = class_tot[s] / w_tot[s]
        if leaf_assign is not None:
            leaf_assign[pos0] = level.node_ids[seg_id]

        if depth >= max_depth:
            break
        pure = class_tot.max(axis=1) == w_tot
        splittable = (~pure) & (w_tot >= 2.0 * min_w) & (level.sizes >= 2)
        level = level.filter_segments(splittable)
        if level.n_segments == 0:
            break
        starts = level.starts()
        seg_id = level.seg_id()
        S = level.n_segments
        class_tot = class_tot[splittable]
        w_tot = w_tot[splittable]
        sq_tot = sq_tot[splittable]

        feats = None
        if mtry < d:
            feats = _per_segment_feature_subsets(rng, S, d, mtry)

        best_score = np.full(S, -np.inf)
        best_feat = np.full(S, -1, dtype=np.int64)
        best_thr = np.full(S, np.nan)
        best_left = np.zeros(S, dtype=np.int64)

        for f in range(d):
            if feats is None:
                sub_idx = None
                sub_starts, sub_sizes, sub_seg = starts, level.sizes, seg_id
                pos = level.orders[f]
                ct, wt, sqt = class_tot, w_tot, sq_tot
            else:
                seg_mask = (feats == f).any(axis=1)
                if not seg_mask.any():
                    continue
                sub_idx = np.nonzero(seg_mask)[0]
                pos_mask = np.repeat(seg_mask, level.sizes)
                pos = level.orders[f][pos_mask]
                sub_sizes = level.sizes[sub_idx]
                sub_starts = np.concatenate(([0], np.cumsum(sub_sizes)[:-1]))
                sub_seg = np.repeat(np.arange(sub_idx.shape[0]), sub_sizes)
                ct, wt, sqt = class_tot[sub_idx], w_tot[sub_idx], sq_tot[sub_idx]

            xs = X[pos, f]
            ys = y[pos]
            ws = w[pos]
            lw = _seg_cumsum(ws, sub_starts, sub_sizes)
            left_sq = np.zeros(xs.shape[0])
            cross = np.zeros(xs.shape[0])
            for c in range(K):
                lc = _seg_cumsum(np.where(ys == c, ws, 0.0), sub_starts, sub_sizes)
                left_sq += lc * lc
                cross += lc * ct[sub_seg, c]
            rw = wt[sub_seg] - lw
            right_sq = sqt[sub_seg] - 2.0 * cross + left_sq
            with np.errstate(divide="ignore", invalid="ignore"):
                score = left_sq / lw + right_sq / rw
            extra = (lw >= min_w) & (rw >= min_w)
            seg_best, local = _best_splits_for_feature(
                xs, sub_starts, sub_sizes, sub_seg, score, extra)
            thr = _midpoint_thresholds(xs, sub_starts, local)

            better = seg_best > (best_score if sub_idx is None else best_score[sub_idx])
            if sub_idx is None:
                best_feat = np.where(better, f, best_feat)
                best_thr = np.where(better, thr, best_thr)
                best_left = np.where(better, local + 1, best_left)
                best_score = np.where(better, seg_best, best_score)
            else:
                tgt = sub_idx[better]
                best_feat[tgt] = f
                best_thr[tgt] = thr[better]
                best_left[tgt] = local[better] + 1
                best_score[tgt] = seg_best[better]

        found = best_score > -np.inf
        level = level.filter_segments(found)
        if level.n_segments == 0:
            break
        best_feat = best_feat[found]
        best_thr = best_thr[found]
        best_left = best_left[found]

        seg_id = level.seg_id()
        rows_level = level.orders[0]
        row_side = np.zeros(n, dtype=bool)
        xv = X[rows_level, best_feat[seg_id]]
        row_side[rows_level] = xv <= best_thr[seg_id]
        level = _partition_level(level, row_side, best_left, store, best_feat, best_thr)
        depth += 1

    tree = store.finish()
    if return_leaf_assignment:
        return tree, leaf_assign
    return tree


def grow_regression_tree(X, grad, hess, *, max_depth=6, reg_lambda=1.0, gamma=0.0,
                         min_child_hessian=1.0, presort=None,
                         return_leaf_assignment=False):
    """Second-order regression tree on per-row gradients and Hessians.

    Leaf weight is -G/(H+lambda); a node splits only when the best gain
    0.5*[GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam)] - gamma is positive
    and both children carry at least min_child_hessian of Hessian mass.
    Pass a shared `presort` (from presort_columns) to avoid re-sorting X
    for every tree of an ensemble.
    """
    X = np.asarray(X, dtype=np.float64)
    g = np.asarray(grad, dtype=np.float64)
    h = np.asarray(hess, dtype=np.float64)
    n, d = X.shape
    if presort is None:
        presort = presort_columns(X)
    lam = float(reg_lambda)

    store = _NodeStore(1)
    leaf_assign = np.zeros(n, dtype=np.int32) if return_leaf_assignment else None
    level = _Level([presort[:, f].copy() for f in range(d)],
                   np.array([n], dtype=np.int64), np.array([0], dtype=np.int32))
    depth = 0

    while level.n_segments:
        starts = level.starts()
        seg_id = level.seg_id()
        pos0 = level.orders[0]
        S = level.n_segments

        g_tot = np.bincount(seg_id, weights=g[pos0], minlength=S)
        h_tot = np.bincount(seg_id, weights=h[pos0], minlength=S)
        for s in range(S):
            store.value[level.node_ids[s]] = np.array([-g_tot[s] / (h_tot[s] + lam)])
        if leaf_assign is not None:
            leaf_assign[pos0] = level.node_ids[seg_id]

        if depth >= max_depth:
            break
        splittable = (level.sizes >= 2) & (h_tot >= 2.0 * min_child_hessian)
        level = level.filter_segments(splittable)
        if level.n_segments == 0:
            break
        starts = level.starts()
        seg_id = level.seg_id()
        S = level.n_segments
        g_tot = g_tot[splittable]
        h_tot = h_tot[splittable]
        parent_term = (g_tot ** 2) / (h_tot + lam)

        best_score = np.full(S, -np.inf)
        best_feat = np.full(S, -1, dtype=np.int64)
        best_thr = np.full(S, np.nan)
        best_left = np.zeros(S, dtype=np.int64)

        # per-position totals are shared by every feature of this level
        gt = g_tot[seg_id]
        ht = h_tot[seg_id]
        positions = np.arange(gt.shape[0])
        for f in range(d):
            pos = level.orders[f]
            xs = X[pos, f]
            lg = _seg_cumsum(g[pos], starts, level.sizes)
            lh = _seg_cumsum(h[pos], starts, level.sizes)
            rg = gt - lg
            rh = ht - lh
            extra = (lh >= min_child_hessian) & (rh >= min_child_hessian)
            # score = lg^2/(lh+lam) + rg^2/(rh+lam), built in place
            lh += lam
            rh += lam
            lg *= lg
            lg /= lh
            rg *= rg
            rg /= rh
            lg += rg
            seg_best, local = _best_splits_for_feature(
                xs, starts, level.sizes, seg_id, lg, extra, positions)
            thr = _midpoint_thresholds(xs, starts, local)

            better = seg_best > best_score
            best_feat = np.where(better, f, best_feat)
            best_thr = np.where(better, thr, best_thr)
            best_left = np.where(better, local + 1, best_left)
            best_score = np.where(better, seg_best, best_score)

        gain = 0.5 * (best_score - parent_term) - gamma
        found = (best_score > -np.inf) & (gain > 0.0)
        level = level.filter_segments(found)
        if level.n_segments == 0:
            break
        best_feat = best_feat[found]
        best_thr = best_thr[found]
        best_left = best_left[found]

        seg_id = level.seg_id()
        rows_level = level.orders[0]
        row_side = np.zeros(n, dtype=bool)
        xv = X[rows_level, best_feat[seg_id]]
        row_side[rows_level] = xv <= best_thr[seg_id]
        level = _partition_level(level, row_side, best_left, store, best_feat, best_thr)
        depth += 1

    tree = store.finish()
    if return_leaf_assignment:
        return tree, leaf_assign
    return tree
