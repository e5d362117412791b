"""CART-style decision trees and random forests on sparse nonnegative features.

Split search is sparse-aware: within a node only features with at least
one nonzero value are candidates, and the implicit zero mass enters the
threshold evaluation as a block below the smallest observed value.
Candidate thresholds are midpoints between consecutive distinct observed
values (zero included). Impurity ties resolve to the lowest feature
index, then the lowest threshold. Per-node work is vectorized over one
(feature, value)-sorted entry array that children inherit by row-mask
filtering, so only the root pays a sort and every other node is linear
in its nonzeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from ..features import SparseVector, to_csr
from ..util import rng_for


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    counts: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left < 0


@dataclass
class TreeModel:
    nodes: list[TreeNode]
    classes: np.ndarray
    n_features: int
    max_depth: int
    min_samples_split: int
    criterion: str = "gini"

    def depth(self) -> int:
        depths = {0: 0}
        best = 0
        for i, node in enumerate(self.nodes):
            if not node.is_leaf:
                depths[node.left] = depths[i] + 1
                depths[node.right] = depths[i] + 1
                best = max(best, depths[i] + 1)
        return best


@dataclass
class ForestModel:
    trees: list[TreeModel]
    classes: np.ndarray
    n_features: int
    n_trees: int
    max_features: str | int = "sqrt"
    bootstrap: bool = True
    seed: int = 0


def _max_features_count(rule: str | int | None, n_features: int) -> int | None:
    if rule is None or rule == "all":
        return None
    if rule == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    if rule == "log2":
        return max(1, int(np.log2(n_features))) if n_features > 1 else 1
    count = int(rule)
    if count < 1:
        raise ValueError(f"max_features must be >= 1, got {rule!r}")
    return min(count, n_features)


def _gather_entries(mat: sparse.csr_matrix, samples: np.ndarray):
    """Concatenate the CSR slices of the node's rows into flat entry arrays."""
    starts = mat.indptr[samples]
    lens = mat.indptr[samples + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return None
    offsets = np.cumsum(lens) - lens
    pos = np.arange(total) - np.repeat(offsets, lens) + np.repeat(starts, lens)
    return mat.indices[pos], mat.data[pos], np.repeat(samples, lens)


def _family_score(left, m_left, node_counts, m):
    right = node_counts[None, :] - left
    m_right = m - m_left
    return (left**2).sum(axis=1) / m_left + (right**2).sum(axis=1) / m_right


def _best_of(score, feat, thr):
    if score.size == 0:
        return None
    best = int(np.argmax(score))  # first max; arrays are (feature, threshold) ordered
    return float(score[best]), int(feat[best]), float(thr[best])


def _best_split(feats, vals, labels, node_counts, m, k_classes):
    """Return (score, feature, threshold) or None if no boundary exists."""
    seg_first = np.empty(feats.size, dtype=bool)
    seg_first[0] = True
    np.not_equal(feats[1:], feats[:-1], out=seg_first[1:])
    seg_starts = np.flatnonzero(seg_first)
    seg_ids = np.cumsum(seg_first) - 1
    seg_lens = np.diff(np.append(seg_starts, feats.size))

    if k_classes == 2:
        cum1 = np.cumsum(labels, dtype=np.int64)
        cums = np.empty((feats.size, 2), dtype=np.int64)
        cums[:, 1] = cum1
        cums[:, 0] = np.arange(1, feats.size + 1) - cum1
    else:
        onehot = labels[:, None] == np.arange(k_classes)[None, :]
        cums = np.cumsum(onehot, axis=0, dtype=np.int64)
    seg_base = np.where(seg_starts[:, None] > 0, cums[seg_starts - 1], 0)
    seg_end = np.append(seg_starts[1:], feats.size) - 1
    seg_totals = cums[seg_end] - seg_base
    zero_counts = node_counts[None, :] - seg_totals
    zeros = m - seg_lens

    # zero boundary per segment (zeros left, all nonzeros right)
    zmask = zeros > 0
    zb = _best_of(
        _family_score(zero_counts[zmask].astype(np.float64), zeros[zmask].astype(np.float64), node_counts, m),
        feats[seg_starts[zmask]],
        vals[seg_starts[zmask]] / 2.0,
    )

    # internal boundaries between consecutive distinct values of one feature
    internal = np.flatnonzero((feats[1:] == feats[:-1]) & (vals[1:] > vals[:-1]))
    ib_seg = seg_ids[internal]
    ib = _best_of(
        _family_score(
            (cums[internal] - seg_base[ib_seg] + zero_counts[ib_seg]).astype(np.float64),
            (internal - seg_starts[ib_seg] + 1 + zeros[ib_seg]).astype(np.float64),
            node_counts,
            m,
        ),
        feats[internal],
        (vals[internal] + vals[internal + 1]) / 2.0,
    )

    if zb is None:
        return ib
    if ib is None:
        return zb
    # both families are (feature, threshold) ordered internally; tie-break
    # across them by lowest feature then lowest threshold
    zb_key = (-zb[0], zb[1], zb[2])
    ib_key = (-ib[0], ib[1], ib[2])
    return zb if zb_key <= ib_key else ib


def _build_tree(
    mat: sparse.csr_matrix,
    y_codes: np.ndarray,
    k_classes: int,
    max_depth: int,
    min_samples_split: int,
    max_features: int | None,
    rng: np.random.Generator | None,
) -> list[TreeNode]:
    n = mat.shape[0]
    root_samples = np.arange(n)
    gathered = _gather_entries(mat, root_samples)
    if gathered is None:
        root_entries = (np.zeros(0, np.int64),) * 3
    else:
        feats, vals, rows = gathered
        # children inherit this (feature, value) order through row-mask
        # filtering, so the whole tree pays for a single lexsort
        order = np.lexsort((vals, feats))
        root_entries = (feats[order], vals[order], rows[order])

    in_right = np.zeros(n, dtype=bool)  # reusable membership buffers
    feat_lut = None
    if max_features is not None:
        feat_lut = np.zeros(int(root_entries[0].max()) + 1 if root_entries[0].size else 1, dtype=bool)
    nodes: list[TreeNode] = []
    stack = [(root_samples, root_entries, 0, -1, "")]
    while stack:
        samples, entries, depth, parent, side = stack.pop()
        node_id = len(nodes)
        if parent >= 0:
            setattr(nodes[parent], side, node_id)
        counts = np.bincount(y_codes[samples], minlength=k_classes)
        m = samples.size
        node = TreeNode(counts=counts)
        nodes.append(node)
        if (
            m < min_samples_split
            or depth >= max_depth
            or int((counts > 0).sum()) <= 1
        ):
            continue
        feats, vals, rows = entries
        if feats.size == 0:
            continue
        sfeats, svals, srows = feats, vals, rows
        if max_features is not None:
            seg_first = np.empty(feats.size, dtype=bool)
            seg_first[0] = True
            np.not_equal(feats[1:], feats[:-1], out=seg_first[1:])
            cand = feats[seg_first]
            if cand.size > max_features:
                chosen = rng.choice(cand, size=max_features, replace=False)
                feat_lut[chosen] = True
                keep = feat_lut[feats]
                feat_lut[chosen] = False
                sfeats, svals, srows = feats[keep], vals[keep], rows[keep]
        found = _best_split(sfeats, svals, y_codes[srows], counts, m, k_classes)
        if found is None:
            continue
        # zero-gain splits are accepted (both children are strictly smaller,
        # so recursion terminates); stumps like XOR need them
        _, feature, threshold = found
        seg = sfeats == feature
        right_rows = srows[seg & (svals > threshold)]
        if right_rows.size == 0 or right_rows.size == m:
            continue
        in_right[right_rows] = True
        member = in_right[samples]
        left_samples, right_samples = samples[~member], samples[member]
        entry_member = in_right[rows]
        left_entries = (feats[~entry_member], vals[~entry_member], rows[~entry_member])
        right_entries = (feats[entry_member], vals[entry_member], rows[entry_member])
        in_right[right_rows] = False
        node.feature = feature
        node.threshold = threshold
        node.counts = counts
        # push right first so the left child is materialized first
        stack.append((right_samples, right_entries, depth + 1, node_id, "right"))
        stack.append((left_samples, left_entries, depth + 1, node_id, "left"))
    return nodes


def _validate_tree_input(X, y, n_features):
    y = np.asarray(y, dtype=np.int64)
    if len(X) != y.size:
        raise ValueError(f"{len(X)} feature vectors but {y.size} labels")
    if y.size < 1:
        raise ValueError("need at least one training example")
    for v in X:
        if np.any(v.values < 0):
            raise ValueError("tree splitting assumes nonnegative feature values")
    if n_features is None:
        n_features = max((int(v.indices[-1]) + 1 for v in X if len(v)), default=0)
    return to_csr(X, n_features), y, n_features


def fit_tree(
    X: Sequence[SparseVector],
    y: Sequence[int],
    max_depth: int = 800,
    min_samples_split: int = 5,
    criterion: str = "gini",
    n_features: int | None = None,
    max_features: str | int | None = None,
    rng: np.random.Generator | None = None,
) -> TreeModel:
    if criterion != "gini":
        raise ValueError(f"unsupported criterion {criterion!r}")
    mat, y, n_features = _validate_tree_input(X, y, n_features)
    classes = np.unique(y)
    y_codes = np.searchsorted(classes, y)
    count = _max_features_count(max_features, n_features)
    nodes = _build_tree(mat, y_codes, classes.size, max_depth, min_samples_split, count, rng)
    return TreeModel(nodes, classes, n_features, max_depth, min_samples_split, criterion)


def _leaf_for(tree: TreeModel, query: SparseVector) -> TreeNode:
    node = tree.nodes[0]
    while not node.is_leaf:
        pos = int(np.searchsorted(query.indices, node.feature))
        value = (
            float(query.values[pos])
            if pos < query.indices.size and query.indices[pos] == node.feature
            else 0.0
        )
        node = tree.nodes[node.left if value <= node.threshold else node.right]
    return node


def predict_proba_tree(tree: TreeModel, X: Sequence[SparseVector]) -> np.ndarray:
    out = np.zeros((len(X), tree.classes.size))
    for i, q in enumerate(X):
        if q.indices.size and q.indices[-1] >= tree.n_features:
            raise ValueError(
                f"query feature {int(q.indices[-1])} exceeds model dimension {tree.n_features}"
            )
        counts = _leaf_for(tree, q).counts
        out[i] = counts / counts.sum()
    return out


# forked workers inherit this via copy-on-write instead of pickling the matrix
_FOREST_CONTEXT: dict = {}


def _fit_forest_tree(index: int) -> list[TreeNode]:
    ctx = _FOREST_CONTEXT
    rng = rng_for(ctx["seed"], f"forest.tree.{index}")
    mat, y, classes = ctx["mat"], ctx["y"], ctx["classes"]
    if ctx["bootstrap"]:
        pick = np.sort(rng.integers(0, y.size, size=y.size))
        mat, y = mat[pick], y[pick]
    y_codes = np.searchsorted(classes, y)
    return _build_tree(
        mat, y_codes, classes.size, ctx["max_depth"], ctx["min_samples_split"], ctx["count"], rng
    )


def fit_forest(
    X: Sequence[SparseVector],
    y: Sequence[int],
    n_trees: int = 100,
    max_depth: int = 800,
    min_samples_split: int = 5,
    max_features: str | int | None = "sqrt",
    bootstrap: bool = True,
    seed: int = 0,
    n_features: int | None = None,
    n_jobs: int = 1,
) -> ForestModel:
    """Bootstrap-aggregated trees. Per-tree seeds derive from (seed, index),
    so fitting may parallelize across trees without changing the result."""
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    mat, y, n_features = _validate_tree_input(X, y, n_features)
    classes = np.unique(y)
    count = _max_features_count(max_features, n_features)
    global _FOREST_CONTEXT
    _FOREST_CONTEXT = {
        "mat": mat,
        "y": y,
        "classes": classes,
        "seed": seed,
        "bootstrap": bootstrap,
        "max_depth": max_depth,
        "min_samples_split": min_samples_split,
        "count": count,
    }
    try:
        if n_jobs > 1:
            import multiprocessing

            try:
                pool_ctx = multiprocessing.get_context("fork")
            except ValueError:
                pool_ctx = None
            if pool_ctx is not None:
                with pool_ctx.Pool(n_jobs) as pool:
                    node_lists = pool.map(_fit_forest_tree, range(n_trees))
            else:
                node_lists = [_fit_forest_tree(i) for i in range(n_trees)]
        else:
            node_lists = [_fit_forest_tree(i) for i in range(n_trees)]
    finally:
        _FOREST_CONTEXT = {}
    trees = [
        TreeModel(nodes, classes, n_features, max_depth, min_samples_split, "gini")
        for nodes in node_lists
    ]
    return ForestModel(trees, classes, n_features, n_trees, max_features or "all", bootstrap, seed)


def predict_proba_forest(forest: ForestModel, X: Sequence[SparseVector]) -> np.ndarray:
    votes = np.zeros((len(X), forest.classes.size))
    for tree in forest.trees:
        proba = predict_proba_tree(tree, X)
        votes[np.arange(len(X)), np.argmax(proba, axis=1)] += 1.0
    return votes / forest.n_trees
