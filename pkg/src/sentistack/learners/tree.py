"""Exact greedy decision trees with a reusable presorted grower.

The grower argsorts every feature column once per training matrix and
partitions those sorted index arrays down the tree, so growing many
trees on the same matrix (boosting rounds, bagged members, one tree per
class) never re-sorts. Split scores come from prefix sums over the
sorted order.

Split selection is deterministic: candidate positions sit between
distinct adjacent sorted values, scores are compared over a (position,
feature) grid in row-major order, and the first maximum wins. The
threshold is the midpoint of the two straddling values and the split
predicate is x <= threshold goes left.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

_GAIN_EPS = 1e-12
_TINY = 1e-300


@dataclass
class DecisionTree:
    feature: np.ndarray  # int32, -1 marks a leaf
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32 child ids
    right: np.ndarray  # int32 child ids
    value: np.ndarray  # (n_nodes, width) float64, filled at leaves

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        """Route every row to its leaf and return the leaf values, shape (n, width)."""
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(len(X), dtype=np.int32)
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not np.any(active):
                break
            rows = np.flatnonzero(active)
            f = feat[rows]
            go_left = X[rows, f] <= self.threshold[node[rows]]
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])
        return self.value[node]


class _TreeBuilder:
    """Accumulates nodes in creation order, then freezes into arrays."""

    def __init__(self, width: int):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[np.ndarray] = []
        self.width = width

    def add(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(np.zeros(self.width))
        return len(self.feature) - 1

    def freeze(self) -> DecisionTree:
        return DecisionTree(
            feature=np.array(self.feature, dtype=np.int32),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int32),
            right=np.array(self.right, dtype=np.int32),
            value=np.stack(self.value).astype(np.float64),
        )


class TreeGrower:
    """Holds one matrix and its per-column sort order; grows many trees on it."""

    def __init__(self, X: np.ndarray):
        self.X = np.asarray(X, dtype=np.float64)
        self.n, self.d = self.X.shape
        # (n, d): order[i, j] is the row index of the i-th smallest value in column j
        self.order = np.argsort(self.X, axis=0, kind="stable")
        self._cols = np.arange(self.d)

    # -- shared machinery ---------------------------------------------------

    def _sorted_x(self, node_order: np.ndarray) -> np.ndarray:
        return self.X[node_order, self._cols]

    def _partition(self, node_order: np.ndarray, feature: int,
                   n_left: int) -> tuple[np.ndarray, np.ndarray]:
        """Split a node's sorted-order matrix into the two children's.

        The left child's rows are exactly the first n_left entries of the
        chosen feature's column; a boolean membership mask then filters
        every column while preserving its order, and since each column
        holds the same row set the result reshapes cleanly.
        """
        n = node_order.shape[0]
        mask = np.zeros(self.n, dtype=bool)
        mask[node_order[:n_left, feature]] = True
        member = mask[node_order]  # (n, d)
        left = node_order.T[member.T].reshape(self.d, n_left).T
        right = node_order.T[~member.T].reshape(self.d, n - n_left).T
        return left, right

    def _best_split(self, score: np.ndarray, xs: np.ndarray, parent_score: float,
                    min_leaf: int) -> tuple[int, int, float] | None:
        """Pick the first-best valid (position, feature); None if nothing improves.

        `score` has shape (n-1, d): the post-split score when the left
        child takes sorted positions 0..p of each column.
        """
        n = xs.shape[0]
        valid = xs[:-1] < xs[1:]
        if min_leaf > 1:
            lo = min_leaf - 1
            hi = n - min_leaf  # positions p < hi keep the right child big enough
            valid[:lo] = False
            valid[hi:] = False
        if not valid.any():
            return None
        masked = np.where(valid, score, -np.inf)
        flat = int(np.argmax(masked))
        best = masked.flat[flat]
        if not best > parent_score + _GAIN_EPS:
            return None
        p, j = divmod(flat, score.shape[1])
        threshold = 0.5 * (xs[p, j] + xs[p + 1, j])
        return p, j, threshold

    # -- regression (one scalar target, Newton leaves) ----------------------

    def grow_regression(self, grad: np.ndarray, hess: np.ndarray, max_depth: int,
                        min_leaf: int,
                        leaf_value: Callable[[float, float, int], float] | None = None,
                        ) -> DecisionTree:
        """Fit targets `grad` by variance-reduction splits.

        Leaf values default to the node mean of grad; a callable
        (grad_sum, hess_sum, count) -> value overrides that, which is
        how the booster installs Newton steps.
        """
        grad = np.asarray(grad, dtype=np.float64)
        hess = np.asarray(hess, dtype=np.float64)
        if leaf_value is None:
            leaf_value = lambda gs, hs, c: gs / c
        builder = _TreeBuilder(width=1)

        def make_leaf(node_id: int, rows: np.ndarray) -> None:
            gs = float(grad[rows].sum())
            hs = float(hess[rows].sum())
            builder.value[node_id][0] = leaf_value(gs, hs, len(rows))

        root = builder.add()
        stack = [(root, self.order, 0)]
        while stack:
            node_id, node_order, depth = stack.pop()
            rows = node_order[:, 0]
            n = len(rows)
            if depth >= max_depth or n < 2 * min_leaf or n < 2:
                make_leaf(node_id, rows)
                continue
            t = grad[node_order]  # (n, d), same multiset per column
            prefix = np.cumsum(t, axis=0)[:-1]
            total = float(grad[rows].sum())
            n_left = np.arange(1, n, dtype=np.float64)[:, None]
            score = prefix ** 2 / n_left + (total - prefix) ** 2 / (n - n_left)
            parent = total * total / n
            xs = self._sorted_x(node_order)
            found = self._best_split(score, xs, parent, min_leaf)
            if found is None:
                make_leaf(node_id, rows)
                continue
            p, j, threshold = found
            left_order, right_order = self._partition(node_order, j, p + 1)
            builder.feature[node_id] = j
            builder.threshold[node_id] = threshold
            left_id = builder.add()
            right_id = builder.add()
            builder.left[node_id] = left_id
            builder.right[node_id] = right_id
            stack.append((right_id, right_order, depth + 1))
            stack.append((left_id, left_order, depth + 1))
        return builder.freeze()

    # -- weighted classification (Gini, distribution leaves) -----------------

    def grow_classification(self, labels: np.ndarray, weights: np.ndarray,
                            max_depth: int, min_leaf: int,
                            n_classes: int = 3) -> DecisionTree:
        """Fit integer labels by weighted-Gini splits; leaves hold class distributions."""
        labels = np.asarray(labels, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.float64)
        builder = _TreeBuilder(width=n_classes)
        # one (n, d) target plane per class: the sample weight where the label matches
        planes = [np.where(labels == c, weights, 0.0) for c in range(n_classes)]

        def make_leaf(node_id: int, rows: np.ndarray) -> None:
            dist = np.array([planes[c][rows].sum() for c in range(n_classes)])
            total = dist.sum()
            if total > 0:
                builder.value[node_id][:] = dist / total
            else:
                builder.value[node_id][:] = 1.0 / n_classes

        root = builder.add()
        stack = [(root, self.order, 0)]
        while stack:
            node_id, node_order, depth = stack.pop()
            rows = node_order[:, 0]
            n = len(rows)
            class_w = np.array([planes[c][rows].sum() for c in range(n_classes)])
            if (depth >= max_depth or n < 2 * min_leaf or n < 2
                    or np.count_nonzero(class_w) <= 1):
                make_leaf(node_id, rows)
                continue
            total_w = class_w.sum()
            prefixes = [np.cumsum(planes[c][node_order], axis=0)[:-1]
                        for c in range(n_classes)]
            w_left = sum(prefixes)
            w_right = total_w - w_left
            num_left = sum(p ** 2 for p in prefixes)
            num_right = sum((class_w[c] - prefixes[c]) ** 2 for c in range(n_classes))
            score = num_left / np.maximum(w_left, _TINY) + num_right / np.maximum(w_right, _TINY)
            parent = float(np.sum(class_w ** 2) / max(total_w, _TINY))
            xs = self._sorted_x(node_order)
            found = self._best_split(score, xs, parent, min_leaf)
            if found is None:
                make_leaf(node_id, rows)
                continue
            p, j, threshold = found
            left_order, right_order = self._partition(node_order, j, p + 1)
            builder.feature[node_id] = j
            builder.threshold[node_id] = threshold
            left_id = builder.add()
            right_id = builder.add()
            builder.left[node_id] = left_id
            builder.right[node_id] = right_id
            stack.append((right_id, right_order, depth + 1))
            stack.append((left_id, left_order, depth + 1))
        return builder.freeze()
