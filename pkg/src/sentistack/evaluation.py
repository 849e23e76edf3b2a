"""Metrics, cross-validated evaluation, and exhaustive grid search.

Aggregate precision/recall/F1 are support-weighted by default with
macro means carried alongside. Zero-division cases (a class never
predicted, or never present) score 0 and are flagged rather than NaN.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np

from .corpus import N_CLASSES, FoldPlan, Label
from .errors import ConfigError, LengthMismatch, TrainingError, UnknownParameter
from .models import predict_labels, resolve_params, train_model, valid_keys
from .rand import derive_seed

# -- metrics -----------------------------------------------------------------


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (3, 3) int64; rows true, columns predicted

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class MetricsReport:
    accuracy: float
    precision: np.ndarray  # (3,) per class
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray  # (3,) int64
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion: ConfusionMatrix
    zero_division_classes: list[int] = field(default_factory=list)


def compute_metrics(y_true: Sequence[int], y_pred: Sequence[int]) -> MetricsReport:
    """Standard 3-class metrics from a confusion matrix."""
    yt = np.asarray(y_true, dtype=np.int64)
    yp = np.asarray(y_pred, dtype=np.int64)
    if len(yt) != len(yp):
        raise LengthMismatch(f"{len(yt)} true labels against {len(yp)} predictions")
    if len(yt) == 0:
        raise LengthMismatch("cannot score an empty prediction set")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(counts, (yt, yp), 1)
    confusion = ConfusionMatrix(counts=counts)

    diag = np.diag(counts).astype(np.float64)
    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)
    total = counts.sum()

    flagged = []
    precision = np.zeros(N_CLASSES)
    recall = np.zeros(N_CLASSES)
    f1 = np.zeros(N_CLASSES)
    for c in range(N_CLASSES):
        if predicted[c] > 0:
            precision[c] = diag[c] / predicted[c]
        else:
            flagged.append(c)
        if support[c] > 0:
            recall[c] = diag[c] / support[c]
        else:
            flagged.append(c)
        if precision[c] + recall[c] > 0:
            f1[c] = 2 * precision[c] * recall[c] / (precision[c] + recall[c])

    weight = support / total
    return MetricsReport(
        accuracy=float(diag.sum() / total),
        precision=precision, recall=recall, f1=f1,
        support=support,
        weighted_precision=float((precision * weight).sum()),
        weighted_recall=float((recall * weight).sum()),
        weighted_f1=float((f1 * weight).sum()),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        confusion=confusion,
        zero_division_classes=sorted(set(flagged)),
    )


def render_text_report(report: MetricsReport, macro: bool = False) -> str:
    """Aligned classification report, two decimals, one class per row."""
    lines = [f"{'class':<10} {'precision':>9} {'recall':>9} {'f1':>9} {'support':>9}"]
    for c in range(N_CLASSES):
        lines.append(
            f"{Label(c).name.capitalize():<10} {report.precision[c]:>9.2f} "
            f"{report.recall[c]:>9.2f} {report.f1[c]:>9.2f} {report.support[c]:>9d}")
    lines.append("")
    lines.append(f"{'accuracy':<10} {report.accuracy:>9.2f} {'':>9} {'':>9} "
                 f"{report.confusion.total:>9d}")
    if macro:
        lines.append(
            f"{'macro':<10} {report.macro_precision:>9.2f} {report.macro_recall:>9.2f} "
            f"{report.macro_f1:>9.2f} {report.confusion.total:>9d}")
    else:
        lines.append(
            f"{'weighted':<10} {report.weighted_precision:>9.2f} "
            f"{report.weighted_recall:>9.2f} {report.weighted_f1:>9.2f} "
            f"{report.confusion.total:>9d}")
    if report.zero_division_classes:
        names = ", ".join(Label(c).name.capitalize()
                          for c in report.zero_division_classes)
        lines.append(f"note: zero-division for {names} reported as 0.00")
    return "\n".join(lines) + "\n"


def report_to_dict(report: MetricsReport) -> dict:
    """Full-precision structured form of a report."""
    per_class = {
        Label(c).name.lower(): {
            "precision": float(report.precision[c]),
            "recall": float(report.recall[c]),
            "f1": float(report.f1[c]),
            "support": int(report.support[c]),
        }
        for c in range(N_CLASSES)
    }
    return {
        "accuracy": report.accuracy,
        "per_class": per_class,
        "weighted": {"precision": report.weighted_precision,
                     "recall": report.weighted_recall,
                     "f1": report.weighted_f1},
        "macro": {"precision": report.macro_precision,
                  "recall": report.macro_recall,
                  "f1": report.macro_f1},
        "confusion": report.confusion.counts.tolist(),
        "zero_division_classes": report.zero_division_classes,
    }


# -- cross-validation --------------------------------------------------------


@dataclass
class CvResult:
    fold_reports: list[MetricsReport]
    mean_accuracy: float
    std_accuracy: float
    mean_weighted_f1: float
    std_weighted_f1: float

    @property
    def k(self) -> int:
        return len(self.fold_reports)


def cross_validate(kind: str, params: Optional[Mapping[str, Any]], X: np.ndarray,
                   y: np.ndarray, fold_plan: FoldPlan, seed: int,
                   observer: Optional[Callable[[int], None]] = None) -> CvResult:
    """Train on each fold's complement, score on the fold, and aggregate.

    `observer`, when given, is called as observer(fold) once per fold
    training; instrumentation and progress reporting hang off it.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    reports = []
    for f in range(fold_plan.k):
        inside = fold_plan.members(f)
        outside = fold_plan.complement(f)
        try:
            model = train_model(kind, X[outside], y[outside], params,
                                seed=derive_seed(seed, f"cv/fold{f}"))
        except TrainingError as err:
            raise type(err)(f"fold {f}: {err}") from err
        if observer is not None:
            observer(f)
        reports.append(compute_metrics(y[inside], predict_labels(model, X[inside])))
    accs = np.array([r.accuracy for r in reports])
    f1s = np.array([r.weighted_f1 for r in reports])
    return CvResult(fold_reports=reports,
                    mean_accuracy=float(accs.mean()),
                    std_accuracy=float(accs.std()),
                    mean_weighted_f1=float(f1s.mean()),
                    std_weighted_f1=float(f1s.std()))


# -- grid search -------------------------------------------------------------

# The reference search space for the stacked ensemble: 3*3*3*3*3*4 = 972 cells.
DEFAULT_CSE_GRID: dict[str, list] = {
    "logreg__C": [0.01, 0.1, 10.0],
    "lgbm__n_estimators": [50, 100, 200],
    "lgbm__learning_rate": [0.01, 0.1, 0.2],
    "knn__n_neighbors": [3, 5, 7],
    "adaboost__n_estimators": [50, 100, 200],
    "final_estimator__estimator__C": [0.01, 0.1, 1.0, 10.0],
}


@dataclass
class GridSpec:
    """Named parameter lists; enumeration is their full Cartesian product.

    Keys keep their insertion order and the last key varies fastest,
    like the innermost loop of a nest.
    """

    params: dict[str, list]

    def n_cells(self) -> int:
        out = 1
        for values in self.params.values():
            out *= len(values)
        return out

    def cells(self):
        keys = list(self.params)
        for combo in itertools.product(*(self.params[k] for k in keys)):
            yield dict(zip(keys, combo))


@dataclass
class GridCell:
    params: dict
    score: float
    cv: CvResult


@dataclass
class GridResult:
    cells: list[GridCell]
    best_index: int
    metric: str
    tie: bool = False

    @property
    def best(self) -> GridCell:
        return self.cells[self.best_index]


def grid_search(grid: GridSpec, kind: str, X: np.ndarray, y: np.ndarray,
                fold_plan: FoldPlan, seed: int,
                base_params: Optional[Mapping[str, Any]] = None,
                metric: str = "accuracy",
                observer: Optional[Callable[[int, int], None]] = None) -> GridResult:
    """Cross-validate every cell; the best is the first cell with maximal score.

    All cells share the fold plan and the seed, so scores are comparable.
    `observer`, when given, is called as observer(cell_index, fold) once
    per training run.
    """
    if not grid.params:
        raise ConfigError("grid is empty")
    if metric not in ("accuracy", "weighted_f1"):
        raise ConfigError(f"unknown grid metric {metric!r}")
    allowed = valid_keys(kind)
    for key in grid.params:
        if key not in allowed:
            raise UnknownParameter(
                f"grid key {key!r} is not valid for model {kind!r}; "
                f"valid keys: {', '.join(sorted(allowed))}")
        if not grid.params[key]:
            raise ConfigError(f"grid key {key!r} has no values")

    cells: list[GridCell] = []
    best_index = -1
    best_score = -np.inf
    tie = False
    for i, cell_params in enumerate(grid.cells()):
        merged = dict(base_params or {})
        merged.update(cell_params)
        resolved = resolve_params(kind, merged)
        cell_observer = (lambda f, _i=i: observer(_i, f)) if observer else None
        cv = cross_validate(kind, resolved, X, y, fold_plan, seed,
                            observer=cell_observer)
        score = cv.mean_accuracy if metric == "accuracy" else cv.mean_weighted_f1
        cells.append(GridCell(params=dict(cell_params), score=score, cv=cv))
        if score > best_score:
            best_score = score
            best_index = i
        elif score == best_score:
            tie = True
    return GridResult(cells=cells, best_index=best_index, metric=metric, tie=tie)
