"""Multiclass gradient-boosted trees and a bootstrap-bagged wrapper.

The booster keeps one score column per class, initialized at the class
log-priors. Every round fits one regression tree per class on the
residual (one-hot minus softmax probability); leaves take the damped
Newton step

    value = ((K - 1) / K) * sum(residual) / sum(p * (1 - p))

with the denominator guarded at 1e-12 (a dead leaf contributes 0).
Scores move by learning_rate times the leaf value. The training
log-loss is recorded every round and must never increase beyond a 1e-9
slack; a violation is a training error, not a warning.

Bagging draws bootstrap resamples from a named splitmix64 stream per
member and averages member distributions at prediction time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteLoss, SingleClass, TrainingError
from ..rand import stream
from .logreg import softmax
from .tree import DecisionTree, TreeGrower

PRIOR_FLOOR = 1e-12
HESSIAN_FLOOR = 1e-12
MONOTONE_SLACK = 1e-9


@dataclass
class GbdtModel:
    init_scores: np.ndarray  # (n_classes,) log-priors
    trees: list[list[DecisionTree]]  # [round][class]
    learning_rate: float
    train_loss: np.ndarray  # length rounds + 1: after init, then after each round
    n_classes: int = 3


def _log_loss(scores: np.ndarray, y: np.ndarray) -> float:
    shifted = scores - scores.max(axis=1, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return -float(logp[np.arange(len(y)), y].mean())


def _fit_booster(X: np.ndarray, y: np.ndarray, n_estimators: int,
                 learning_rate: float, max_depth: int, min_leaf: int,
                 n_classes: int) -> GbdtModel:
    n = len(X)
    counts = np.bincount(y, minlength=n_classes)
    priors = counts / n
    init_scores = np.log(np.maximum(priors, PRIOR_FLOOR))

    grower = TreeGrower(X)
    scores = np.tile(init_scores, (n, 1))
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    factor = (n_classes - 1.0) / n_classes

    def leaf_value(grad_sum: float, hess_sum: float, count: int) -> float:
        if hess_sum <= HESSIAN_FLOOR:
            return 0.0
        return factor * grad_sum / hess_sum

    losses = [_log_loss(scores, y)]
    rounds: list[list[DecisionTree]] = []
    for r in range(n_estimators):
        prob = softmax(scores)
        residual = onehot - prob
        hessian = prob * (1.0 - prob)
        round_trees: list[DecisionTree] = []
        for c in range(n_classes):
            tree = grower.grow_regression(
                residual[:, c], hessian[:, c], max_depth, min_leaf, leaf_value)
            round_trees.append(tree)
            scores[:, c] += learning_rate * tree.predict_value(X)[:, 0]
        rounds.append(round_trees)
        loss = _log_loss(scores, y)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"training log-loss became non-finite at round {r}")
        if loss > losses[-1] + MONOTONE_SLACK:
            raise TrainingError(
                f"training log-loss rose from {losses[-1]:.12f} to {loss:.12f} "
                f"at round {r}")
        losses.append(loss)

    return GbdtModel(init_scores=init_scores, trees=rounds,
                     learning_rate=learning_rate,
                     train_loss=np.array(losses), n_classes=n_classes)


def train_gbdt(X: np.ndarray, y: np.ndarray, n_estimators: int = 50,
               learning_rate: float = 0.01, max_depth: int = 6,
               min_leaf: int = 5, n_classes: int = 3) -> GbdtModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_estimators < 1:
        raise ValueError(f"n_estimators must be at least 1, got {n_estimators}")
    if learning_rate <= 0:
        raise ValueError(f"learning_rate must be positive, got {learning_rate}")
    if len(np.unique(y)) < 2:
        raise SingleClass("training labels contain a single class")
    return _fit_booster(X, y, n_estimators, learning_rate, max_depth, min_leaf, n_classes)


def predict_gbdt(model: GbdtModel, X: np.ndarray) -> np.ndarray:
    """Softmax of accumulated scores, shape (n, n_classes)."""
    X = np.asarray(X, dtype=np.float64)
    scores = np.tile(model.init_scores, (len(X), 1))
    for round_trees in model.trees:
        for c, tree in enumerate(round_trees):
            scores[:, c] += model.learning_rate * tree.predict_value(X)[:, 0]
    return softmax(scores)


@dataclass
class BaggedModel:
    members: list[GbdtModel]
    bootstrap: bool
    seed: int
    n_classes: int = 3


def train_bagged_gbdt(X: np.ndarray, y: np.ndarray, n_members: int = 10,
                      bootstrap: bool = True, seed: int = 0,
                      n_estimators: int = 50, learning_rate: float = 0.01,
                      max_depth: int = 6, min_leaf: int = 5,
                      n_classes: int = 3) -> BaggedModel:
    """Bag boosted models over bootstrap resamples.

    Member m draws its indices from the stream (seed, "bagging/member{m}").
    With bootstrap off every member sees the full data, so a single
    member reduces to the plain booster.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_members < 1:
        raise ValueError(f"n_members must be at least 1, got {n_members}")
    if len(np.unique(y)) < 2:
        raise SingleClass("training labels contain a single class")
    n = len(X)
    members = []
    for m in range(n_members):
        if bootstrap:
            rng = stream(seed, f"bagging/member{m}")
            idx = np.array([rng.next_below(n) for _ in range(n)], dtype=np.int64)
            Xm, ym = X[idx], y[idx]
        else:
            Xm, ym = X, y
        members.append(_fit_booster(Xm, ym, n_estimators, learning_rate,
                                    max_depth, min_leaf, n_classes))
    return BaggedModel(members=members, bootstrap=bootstrap, seed=seed,
                       n_classes=n_classes)


def predict_bagged(model: BaggedModel, X: np.ndarray) -> np.ndarray:
    """Mean of member distributions, shape (n, n_classes)."""
    X = np.asarray(X, dtype=np.float64)
    total = np.zeros((len(X), model.n_classes))
    for member in model.members:
        total += predict_gbdt(member, X)
    return total / len(model.members)
