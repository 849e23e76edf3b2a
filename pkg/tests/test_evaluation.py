"""Metrics identities, cross-validation aggregation, and grid enumeration."""

import json

import numpy as np
import pytest

from conftest import blobs
from sentistack.corpus import FoldPlan, make_folds
from sentistack.errors import (ConfigError, LengthMismatch, SingleClass,
                               UnknownParameter)
from sentistack.evaluation import (DEFAULT_CSE_GRID, CvResult, GridSpec,
                                   compute_metrics, cross_validate,
                                   grid_search, render_text_report,
                                   report_to_dict)

# ------------------------------------------------------------------- metrics
# Worked example. True labels by class: 4/3/3; confusion
#   [[2 1 1]
#    [1 2 0]
#    [0 1 2]]

YT = [0, 0, 0, 0, 1, 1, 1, 2, 2, 2]
YP = [0, 0, 1, 2, 1, 1, 0, 2, 2, 1]


def test_confusion_counts_by_hand():
    r = compute_metrics(YT, YP)
    assert r.confusion.counts.tolist() == [[2, 1, 1], [1, 2, 0], [0, 1, 2]]
    assert r.confusion.total == 10
    assert r.support.tolist() == [4, 3, 3]


def test_per_class_scores_by_hand():
    r = compute_metrics(YT, YP)
    assert np.allclose(r.precision, [2 / 3, 2 / 4, 2 / 3])
    assert np.allclose(r.recall, [2 / 4, 2 / 3, 2 / 3])
    assert np.allclose(r.f1, [4 / 7, 4 / 7, 2 / 3])
    assert r.accuracy == 0.6


def test_aggregate_scores_by_hand():
    r = compute_metrics(YT, YP)
    assert np.isclose(r.weighted_precision, 37 / 60)
    assert np.isclose(r.weighted_recall, 0.6)
    assert np.isclose(r.weighted_f1, 0.6)
    assert np.isclose(r.macro_precision, 11 / 18)
    assert np.isclose(r.macro_recall, (1 / 2 + 2 / 3 + 2 / 3) / 3)
    assert np.isclose(r.macro_f1, (4 / 7 + 4 / 7 + 2 / 3) / 3)
    assert r.zero_division_classes == []


def test_never_predicted_class_scores_zero_and_is_flagged():
    r = compute_metrics([0, 0, 1, 1, 2, 2], [0, 0, 1, 1, 1, 0])
    assert r.precision[2] == 0.0 and r.f1[2] == 0.0
    assert r.recall[2] == 0.0  # genuinely missed, not a zero-division
    assert r.zero_division_classes == [2]


def test_absent_class_is_flagged_once_even_when_also_unpredicted():
    r = compute_metrics([0, 0, 1, 1], [0, 0, 1, 1])
    assert r.zero_division_classes == [2]
    assert r.accuracy == 1.0


def test_accuracy_equals_weighted_recall_on_fuzzed_pairs():
    rng = np.random.default_rng(99)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        yt = rng.integers(0, 3, size=n)
        yp = rng.integers(0, 3, size=n)
        r = compute_metrics(yt, yp)
        assert abs(r.accuracy - r.weighted_recall) < 1e-12


def test_f1_is_the_harmonic_mean_on_fuzzed_pairs():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(3, 60))
        r = compute_metrics(rng.integers(0, 3, n), rng.integers(0, 3, n))
        for c in range(3):
            p, q = r.precision[c], r.recall[c]
            want = 2 * p * q / (p + q) if p + q > 0 else 0.0
            assert abs(r.f1[c] - want) < 1e-12
        w = r.support / r.support.sum()
        assert abs(r.weighted_f1 - (r.f1 * w).sum()) < 1e-12


def test_length_mismatch_and_empty_input_are_rejected():
    with pytest.raises(LengthMismatch):
        compute_metrics([0, 1], [0])
    with pytest.raises(LengthMismatch):
        compute_metrics([], [])


def test_text_report_layout():
    out = render_text_report(compute_metrics(YT, YP))
    assert out == (
        "class      precision    recall        f1   support\n"
        "Negative        0.67      0.50      0.57         4\n"
        "Neutral         0.50      0.67      0.57         3\n"
        "Positive        0.67      0.67      0.67         3\n"
        "\n"
        "accuracy        0.60                            10\n"
        "weighted        0.62      0.60      0.60        10\n")


def test_text_report_macro_footer():
    out = render_text_report(compute_metrics(YT, YP), macro=True)
    assert out.endswith("macro           0.61      0.61      0.60        10\n")
    assert "weighted" not in out


def test_text_report_zero_division_note():
    out = render_text_report(compute_metrics([0, 0, 1, 1], [0, 0, 1, 1]))
    assert out.endswith("note: zero-division for Positive reported as 0.00\n")


def test_report_dict_is_full_precision_and_json_ready():
    r = compute_metrics(YT, YP)
    d = report_to_dict(r)
    assert d["accuracy"] == r.accuracy
    assert d["per_class"]["negative"]["precision"] == r.precision[0]
    assert d["per_class"]["positive"]["support"] == 3
    assert d["weighted"]["f1"] == r.weighted_f1
    assert d["macro"]["recall"] == r.macro_recall
    assert d["confusion"] == r.confusion.counts.tolist()
    assert d["zero_division_classes"] == []
    json.dumps(d)  # plain types only


# ---------------------------------------------------------- cross-validation

def test_cv_on_separable_data_is_perfect():
    X, y = blobs(6, [(-4, 0), (0, 0), (4, 0)], scale=0.3, seed=1)
    plan = make_folds(y, k=3, seed=5)
    res = cross_validate("logreg", None, X, y, plan, seed=2)
    assert res.k == 3
    assert res.mean_accuracy == 1.0 and res.std_accuracy == 0.0
    assert res.mean_weighted_f1 == 1.0
    assert sum(r.confusion.total for r in res.fold_reports) == 18


def test_cv_aggregates_match_fold_reports():
    X, y = blobs(7, [(-1.5, 0), (0, 0), (1.5, 0)], scale=0.8, seed=8)
    plan = make_folds(y, k=3, seed=9)
    res = cross_validate("knn", {"knn__n_neighbors": 3}, X, y, plan, seed=4)
    accs = np.array([r.accuracy for r in res.fold_reports])
    f1s = np.array([r.weighted_f1 for r in res.fold_reports])
    assert res.mean_accuracy == accs.mean()
    assert res.std_accuracy == accs.std()
    assert res.mean_weighted_f1 == f1s.mean()
    assert res.std_weighted_f1 == f1s.std()


def test_cv_observer_runs_once_per_fold_in_order():
    X, y = blobs(5, [(-3, 0), (0, 0), (3, 0)], scale=0.4, seed=3)
    plan = make_folds(y, k=3, seed=6)
    seen = []
    cross_validate("logreg", None, X, y, plan, seed=1, observer=seen.append)
    assert seen == [0, 1, 2]


def test_cv_failure_is_annotated_with_the_fold():
    X = np.array([[0.0], [0.2], [5.0], [5.2]])
    y = np.array([0, 0, 1, 1])
    plan = FoldPlan(k=2, assignments=np.array([1, 1, 0, 0]), seed=0,
                    stratified=False)
    with pytest.raises(SingleClass, match="fold 0:"):
        cross_validate("logreg", None, X, y, plan, seed=0)


def test_cv_repeats_bitwise_identically():
    X, y = blobs(6, [(-2, 0), (0, 0), (2, 0)], scale=0.6, seed=12)
    plan = make_folds(y, k=3, seed=13)
    a = cross_validate("bagged_gbdt", {"lgbm__n_estimators": 5,
                                       "bag__n_members": 2}, X, y, plan, seed=3)
    b = cross_validate("bagged_gbdt", {"lgbm__n_estimators": 5,
                                       "bag__n_members": 2}, X, y, plan, seed=3)
    assert a.mean_accuracy == b.mean_accuracy
    assert [r.accuracy for r in a.fold_reports] == [r.accuracy for r in b.fold_reports]


# --------------------------------------------------------------- grid search

def test_reference_grid_has_972_cells():
    spec = GridSpec(params=dict(DEFAULT_CSE_GRID))
    assert spec.n_cells() == 972
    cells = list(spec.cells())
    assert len(cells) == 972
    assert len({tuple(sorted(c.items())) for c in cells}) == 972


def test_cells_enumerate_with_the_last_key_fastest():
    spec = GridSpec(params={"first": [1, 2], "second": [10, 20, 30]})
    assert list(spec.cells()) == [
        {"first": 1, "second": 10}, {"first": 1, "second": 20},
        {"first": 1, "second": 30}, {"first": 2, "second": 10},
        {"first": 2, "second": 20}, {"first": 2, "second": 30}]


def test_grid_search_ties_keep_the_first_best_cell():
    X, y = blobs(6, [(-4, 0), (0, 0), (4, 0)], scale=0.3, seed=21)
    plan = make_folds(y, k=2, seed=22)
    res = grid_search(GridSpec({"logreg__C": [1.0, 10.0]}), "logreg",
                      X, y, plan, seed=5)
    assert [c.score for c in res.cells] == [1.0, 1.0]
    assert res.best_index == 0 and res.tie is True
    assert res.best.params == {"logreg__C": 1.0}
    assert res.metric == "accuracy"


def test_grid_search_picks_the_higher_scoring_cell():
    X, y = blobs(5, [(-3, 0), (0, 0), (3, 0)], scale=0.4, seed=31)
    plan = make_folds(y, k=3, seed=32)
    res = grid_search(GridSpec({"knn__n_neighbors": [1, 9]}), "knn",
                      X, y, plan, seed=6)
    assert res.cells[0].score > res.cells[1].score
    assert res.best_index == 0 and res.tie is False
    assert isinstance(res.best.cv, CvResult)


def test_grid_search_observer_covers_every_cell_and_fold():
    X, y = blobs(5, [(-3, 0), (0, 0), (3, 0)], scale=0.4, seed=41)
    plan = make_folds(y, k=2, seed=42)
    seen = []
    grid_search(GridSpec({"logreg__C": [0.1, 1.0, 10.0]}), "logreg",
                X, y, plan, seed=7,
                observer=lambda cell, fold: seen.append((cell, fold)))
    assert seen == [(c, f) for c in range(3) for f in range(2)]


def test_grid_search_merges_base_params_through_validation():
    X, y = blobs(4, [(-3, 0), (0, 0), (3, 0)], scale=0.4, seed=51)
    plan = make_folds(y, k=2, seed=52)
    with pytest.raises(UnknownParameter, match="knn__n_neighbors"):
        grid_search(GridSpec({"logreg__C": [0.1]}), "logreg", X, y, plan,
                    seed=8, base_params={"knn__n_neighbors": 3})


def test_grid_search_config_errors():
    X, y = blobs(4, [(-3, 0), (0, 0), (3, 0)], scale=0.4, seed=61)
    plan = make_folds(y, k=2, seed=62)
    with pytest.raises(ConfigError, match="empty"):
        grid_search(GridSpec(params={}), "logreg", X, y, plan, seed=1)
    with pytest.raises(ConfigError, match="unknown grid metric"):
        grid_search(GridSpec({"logreg__C": [0.1]}), "logreg", X, y, plan,
                    seed=1, metric="auc")
    with pytest.raises(UnknownParameter, match="not valid for model"):
        grid_search(GridSpec({"bogus__key": [1]}), "logreg", X, y, plan, seed=1)
    with pytest.raises(ConfigError, match="has no values"):
        grid_search(GridSpec({"logreg__C": []}), "logreg", X, y, plan, seed=1)
