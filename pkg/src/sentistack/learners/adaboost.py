"""Multiclass AdaBoost (the SAMME reweighting) over shallow trees.

Each stage fits a weighted-Gini tree, default depth 1. With K classes a
stage earns

    alpha = ln((1 - eps) / eps) + ln(K - 1)

where eps is its weighted misclassification. A stage at or above the
chance bar 1 - 1/K is discarded and boosting halts; a perfect stage is
kept with eps clamped to a small floor (capping alpha) and also halts.
Prediction sums alpha-weighted hard votes and normalizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateStage, SingleClass
from .tree import DecisionTree, TreeGrower

EPS_FLOOR = 1e-10


@dataclass
class AdaBoostModel:
    stages: list[DecisionTree]
    alphas: np.ndarray  # (n_stages,)
    stage_errors: np.ndarray  # (n_stages,) weighted error of each kept stage
    n_classes: int = 3
    halted_early: bool = False


def train_adaboost(X: np.ndarray, y: np.ndarray, n_estimators: int = 50,
                   max_depth: int = 1, min_leaf: int = 1,
                   n_classes: int = 3) -> AdaBoostModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_estimators < 1:
        raise ValueError(f"n_estimators must be at least 1, got {n_estimators}")
    if len(np.unique(y)) < 2:
        raise SingleClass("training labels contain a single class")

    n = len(X)
    chance_bar = 1.0 - 1.0 / n_classes
    grower = TreeGrower(X)
    weights = np.full(n, 1.0 / n)
    stages: list[DecisionTree] = []
    alphas: list[float] = []
    errors: list[float] = []
    halted = False

    for _ in range(n_estimators):
        tree = grower.grow_classification(y, weights, max_depth, min_leaf, n_classes)
        pred = np.argmax(tree.predict_value(X), axis=1)
        miss = pred != y
        eps = float(weights[miss].sum())
        if eps >= chance_bar:
            if not stages:
                raise DegenerateStage(
                    f"first stage has weighted error {eps:.4f}, at or above chance "
                    f"{chance_bar:.4f}")
            halted = True
            break
        if eps <= 0.0:
            alpha = math.log((1.0 - EPS_FLOOR) / EPS_FLOOR) + math.log(n_classes - 1.0)
            stages.append(tree)
            alphas.append(alpha)
            errors.append(0.0)
            halted = True
            break
        alpha = math.log((1.0 - eps) / eps) + math.log(n_classes - 1.0)
        stages.append(tree)
        alphas.append(alpha)
        errors.append(eps)
        weights = weights * np.exp(alpha * miss)
        weights = weights / weights.sum()

    return AdaBoostModel(stages=stages, alphas=np.array(alphas),
                         stage_errors=np.array(errors), n_classes=n_classes,
                         halted_early=halted)


def predict_adaboost(model: AdaBoostModel, X: np.ndarray) -> np.ndarray:
    """Normalized alpha-weighted vote distributions, shape (n, n_classes)."""
    X = np.asarray(X, dtype=np.float64)
    votes = np.zeros((len(X), model.n_classes))
    rows = np.arange(len(X))
    for tree, alpha in zip(model.stages, model.alphas):
        winner = np.argmax(tree.predict_value(X), axis=1)
        votes[rows, winner] += alpha
    return votes / votes.sum(axis=1, keepdims=True)
