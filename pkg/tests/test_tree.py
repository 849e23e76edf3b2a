"""Decision tree growing: split selection against brute-force oracles."""

import numpy as np
import pytest

from sentistack.learners.tree import DecisionTree, TreeGrower


def grow_reg(X, targets, max_depth=3, min_leaf=1):
    return TreeGrower(np.asarray(X, dtype=np.float64)).grow_regression(
        targets, np.ones(len(targets)), max_depth=max_depth, min_leaf=min_leaf)


def grow_cls(X, labels, weights=None, max_depth=3, min_leaf=1, n_classes=3):
    X = np.asarray(X, dtype=np.float64)
    if weights is None:
        weights = np.ones(len(labels))
    return TreeGrower(X).grow_classification(
        np.asarray(labels), np.asarray(weights, dtype=np.float64),
        max_depth=max_depth, min_leaf=min_leaf, n_classes=n_classes)


def leaf_for(tree, x):
    node = 0
    while tree.feature[node] >= 0:
        if x[tree.feature[node]] <= tree.threshold[node]:
            node = tree.left[node]
        else:
            node = tree.right[node]
    return node


def test_single_split_midpoint_threshold():
    X = np.array([[0.0], [1.0], [10.0], [11.0]])
    tree = grow_reg(X, np.array([0.0, 0.0, 5.0, 5.0]), max_depth=1)
    root = 0
    assert tree.feature[root] == 0
    assert tree.threshold[root] == pytest.approx(5.5)  # midpoint of 1 and 10
    assert tree.predict_value(X)[:, 0] == pytest.approx([0.0, 0.0, 5.0, 5.0])


def test_boundary_goes_left():
    X = np.array([[0.0], [2.0], [10.0], [12.0]])
    tree = grow_reg(X, np.array([0.0, 0.0, 8.0, 8.0]), max_depth=1)
    t = tree.threshold[0]
    out = tree.predict_value(np.array([[t], [np.nextafter(t, np.inf)]]))[:, 0]
    assert out[0] == pytest.approx(0.0)  # x == threshold routes left
    assert out[1] == pytest.approx(8.0)


def test_constant_target_yields_single_leaf():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    tree = grow_reg(X, np.full(4, 2.5), max_depth=4)
    assert tree.n_nodes == 1
    assert tree.feature[0] == -1
    assert tree.predict_value(X)[:, 0] == pytest.approx([2.5] * 4)


def test_no_split_between_equal_values():
    # identical feature values cannot host a split even if targets differ
    X = np.array([[1.0], [1.0], [1.0]])
    tree = grow_reg(X, np.array([0.0, 1.0, 2.0]), max_depth=3)
    assert tree.n_nodes == 1
    assert tree.predict_value(X)[0, 0] == pytest.approx(1.0)


def test_min_leaf_respected():
    X = np.arange(10, dtype=np.float64).reshape(-1, 1)
    targets = np.array([0.0] * 9 + [100.0])
    tree = grow_reg(X, targets, max_depth=4, min_leaf=3)

    def walk(node, count_mask):
        if tree.feature[node] == -1:
            assert count_mask.sum() >= 3
            return
        go_left = X[count_mask, 0] <= tree.threshold[node]
        left_mask = count_mask.copy()
        left_mask[count_mask] = go_left
        right_mask = count_mask & ~left_mask
        walk(tree.left[node], left_mask)
        walk(tree.right[node], right_mask)

    walk(0, np.ones(10, dtype=bool))


def test_depth_limit():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(64, 2))
    targets = rng.normal(size=64)
    tree = grow_reg(X, targets, max_depth=2)

    def depth(node):
        if tree.feature[node] == -1:
            return 0
        return 1 + max(depth(tree.left[node]), depth(tree.right[node]))

    assert depth(0) <= 2


def brute_best_split(X, targets):
    """Exhaustive variance-gain search mirroring the pinned tie rules."""
    n, d = X.shape
    parent = targets.sum() ** 2 / n
    best = (None, None, -np.inf)
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs, ts = X[order, j], targets[order]
        csum = np.cumsum(ts)
        total = csum[-1]
        for i in range(n - 1):
            if xs[i] == xs[i + 1]:
                continue
            nl = i + 1
            gain = csum[i] ** 2 / nl + (total - csum[i]) ** 2 / (n - nl) - parent
            # first occurrence in (position, feature) row-major order wins
            if gain > best[2] + 1e-15:
                best = (j, (xs[i] + xs[i + 1]) / 2, gain)
    return best


@pytest.mark.parametrize("seed", range(8))
def test_root_split_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 3)).round(1)  # rounding forces duplicate values
    targets = rng.normal(size=40)
    tree = grow_reg(X, targets, max_depth=1)
    j, threshold, gain = brute_best_split(X, targets)
    if gain <= 1e-12:
        assert tree.n_nodes == 1
    else:
        assert tree.feature[0] == j
        assert tree.threshold[0] == pytest.approx(threshold)


def test_leaf_value_callable_receives_sums():
    X = np.array([[0.0], [1.0], [10.0], [11.0]])
    grad = np.array([1.0, 2.0, 30.0, 40.0])
    hess = np.array([1.0, 1.0, 2.0, 2.0])
    grower = TreeGrower(X)
    seen = []

    def leaf(grad_sum, hess_sum, count):
        seen.append((grad_sum, hess_sum, count))
        return grad_sum / hess_sum

    tree = grower.grow_regression(grad, hess, max_depth=1, min_leaf=1, leaf_value=leaf)
    assert sorted(seen) == [(3.0, 2.0, 2), (70.0, 4.0, 2)]
    assert tree.predict_value(X)[:, 0] == pytest.approx([1.5, 1.5, 17.5, 17.5])


def test_classification_pure_node_stops():
    X = np.arange(6, dtype=np.float64).reshape(-1, 1)
    labels = np.zeros(6, dtype=np.int64)
    tree = grow_cls(X, labels, max_depth=3)
    assert tree.n_nodes == 1
    assert tree.value[0].tolist() == [1.0, 0.0, 0.0]


def test_classification_hand_example():
    # class 0 on the left, class 2 on the right, clean split at 2.5
    X = np.array([[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]])
    labels = np.array([0, 0, 0, 2, 2, 2])
    tree = grow_cls(X, labels, max_depth=1)
    assert tree.threshold[0] == pytest.approx(2.5)
    dist = tree.predict_value(X)
    assert dist[0].tolist() == [1.0, 0.0, 0.0]
    assert dist[-1].tolist() == [0.0, 0.0, 1.0]


def test_classification_weighted_gini_moves_split():
    # unweighted, the middle pair splits evenly; upweighting the single
    # class-1 point drags the optimum toward isolating it
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    labels = np.array([0, 0, 1, 0])
    heavy = np.array([1.0, 1.0, 50.0, 1.0])
    tree = grow_cls(X, labels, weights=heavy, max_depth=2)
    dist = tree.predict_value(np.array([[2.0]]))
    assert dist[0, 1] > 0.9


def test_classification_distribution_leaves_sum_to_one():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(30, 2))
    labels = rng.integers(0, 3, size=30)
    tree = grow_cls(X, labels, max_depth=2, min_leaf=4)
    dist = tree.predict_value(X)
    np.testing.assert_allclose(dist.sum(axis=1), 1.0, atol=1e-12)


def test_tie_prefers_earlier_feature():
    # identical split structure in both columns: feature 0 must win
    X = np.array([[0.0, 0.0], [1.0, 1.0], [10.0, 10.0], [11.0, 11.0]])
    targets = np.array([0.0, 0.0, 7.0, 7.0])
    tree = grow_reg(X, targets, max_depth=1)
    assert tree.feature[0] == 0


def test_predict_value_is_vectorized_descent():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(50, 3))
    targets = rng.normal(size=50)
    tree = grow_reg(X, targets, max_depth=4, min_leaf=2)
    batch = tree.predict_value(X)[:, 0]
    single = np.array([tree.predict_value(x[None, :])[0, 0] for x in X])
    assert batch == pytest.approx(single)


def test_deterministic_across_runs():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(40, 4))
    targets = rng.normal(size=40)
    a = grow_reg(X, targets, max_depth=3)
    b = grow_reg(X, targets, max_depth=3)
    assert a.feature.tolist() == b.feature.tolist()
    assert a.threshold.tolist() == b.threshold.tolist()
