"""SAMME boosting: stage-weight formula, halting rules, reweighting."""

import math

import numpy as np
import pytest

from sentistack.errors import DegenerateStage, SingleClass
from sentistack.learners.adaboost import (
    EPS_FLOOR,
    predict_adaboost,
    train_adaboost,
)

from conftest import blobs


def test_retained_stage_errors_below_chance():
    X, y = blobs(20, [(-2.0, 0.0), (0.0, 2.0), (2.0, 0.0)], scale=1.2, seed=0)
    model = train_adaboost(X, y, n_estimators=30)
    assert len(model.stages) >= 1
    assert (model.stage_errors < 1.0 - 1.0 / 3.0).all()


def test_alpha_formula_recoverable_from_stage_errors():
    X, y = blobs(20, [(-2.0, 0.0), (0.0, 2.0), (2.0, 0.0)], scale=1.2, seed=1)
    model = train_adaboost(X, y, n_estimators=20)
    for alpha, eps in zip(model.alphas, model.stage_errors):
        if eps > 0.0:
            want = math.log((1 - eps) / eps) + math.log(2.0)
            assert alpha == pytest.approx(want, rel=1e-12)


def test_perfect_stump_halts_with_capped_alpha():
    # single feature separates class 0 from class 1 perfectly at depth 1
    X = np.array([[0.0], [0.1], [5.0], [5.1]])
    y = np.array([0, 0, 1, 1])
    model = train_adaboost(X, y, n_estimators=10)
    assert len(model.stages) == 1
    assert model.halted_early
    assert model.stage_errors[0] == 0.0
    want = math.log((1 - EPS_FLOOR) / EPS_FLOOR) + math.log(2.0)
    assert model.alphas[0] == pytest.approx(want)
    pred = np.argmax(predict_adaboost(model, X), axis=1)
    assert pred.tolist() == [0, 0, 1, 1]


def test_first_stage_at_chance_raises():
    # one constant feature: no split exists, the root leaf predicts the
    # majority class and the weighted error sits at the chance bar
    X = np.zeros((9, 1))
    y = np.array([0, 1, 2] * 3)
    with pytest.raises(DegenerateStage):
        train_adaboost(X, y, n_estimators=5)


def test_later_chance_stage_halts_quietly():
    # separable at first; boosting reweights toward the noise points and
    # eventually stalls, which must clip the ensemble rather than raise
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(-2, 0.3, size=(12, 1)), rng.normal(2, 0.3, size=(12, 1))])
    y = np.array([0] * 12 + [1] * 12)
    y[0] = 1  # contradiction inside the left cluster
    y[12] = 0
    model = train_adaboost(X, y, n_estimators=200)
    assert len(model.stages) >= 1
    assert (model.stage_errors < 2.0 / 3.0).all()


def test_one_boosting_round_by_hand():
    X = np.array([[0.0], [1.0], [4.0], [5.0], [8.0]])
    y = np.array([0, 0, 1, 1, 0])  # last point unreachable for one stump
    model = train_adaboost(X, y, n_estimators=2, max_depth=1)
    # first stump: best split isolates {0,1} vs {4,5,8}; it misses only x=8
    assert model.stage_errors[0] == pytest.approx(0.2)
    assert model.alphas[0] == pytest.approx(math.log(0.8 / 0.2) + math.log(2.0))
    if len(model.stages) > 1:
        # hand-run the reweighting: missed point scaled by exp(alpha)
        w = np.full(5, 0.2)
        w[4] *= math.exp(model.alphas[0])
        w /= w.sum()
        # second stump trained under these weights: its recorded error must
        # be the weighted miss rate of some stump under w, hence < 2/3
        assert model.stage_errors[1] < 2.0 / 3.0


def test_prediction_distribution_valid():
    X, y = blobs(15, [(-2.0, 0.0), (0.0, 2.0), (2.0, 0.0)], scale=1.0, seed=3)
    model = train_adaboost(X, y, n_estimators=25)
    probs = predict_adaboost(model, X)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    assert (probs >= 0).all()


def test_boosting_improves_over_single_stump():
    # diagonal boundary: no single axis-aligned stump gets it right,
    # an ensemble of stumps can
    rng = np.random.default_rng(4)
    X = rng.uniform(-1, 1, size=(120, 2))
    y = (X[:, 0] + X[:, 1] > 0).astype(int)
    one = train_adaboost(X, y, n_estimators=1, n_classes=2)
    many = train_adaboost(X, y, n_estimators=40, n_classes=2)
    acc_one = (np.argmax(predict_adaboost(one, X), axis=1) == y).mean()
    acc_many = (np.argmax(predict_adaboost(many, X), axis=1) == y).mean()
    assert acc_many > acc_one


def test_single_class_rejected():
    with pytest.raises(SingleClass):
        train_adaboost(np.zeros((4, 1)), np.zeros(4, dtype=int))


def test_deterministic():
    X, y = blobs(12, [(-2.0,), (0.0,), (2.0,)], scale=0.8, seed=5)
    a = train_adaboost(X, y, n_estimators=15)
    b = train_adaboost(X, y, n_estimators=15)
    assert np.array_equal(a.alphas, b.alphas)
    assert np.array_equal(a.stage_errors, b.stage_errors)
