"""Stacked ensemble: out-of-fold base predictions feed a one-vs-rest meta model.

The meta-feature matrix has one 3-wide block per base model in the
fixed order logreg, bagged_gbdt, knn, adaboost. Row i is always
produced by base models trained without sample i, so the meta model
never trains on leaked information. For inference the four bases are
refit on all training rows; the meta model keeps its out-of-fold
weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

from .corpus import FoldPlan, make_folds
from .errors import TrainingError
from .learners.logreg import (BinaryLogRegModel, predict_binary_logreg,
                              train_binary_logreg)
from .models import BASE_KINDS, predict_proba as _predict_base, train_base_model
from .rand import derive_seed

N_CLASSES = 3
META_WIDTH = len(BASE_KINDS) * N_CLASSES  # 12


def build_meta_features(X: np.ndarray, y: np.ndarray, fold_plan: FoldPlan,
                        params: Mapping[str, Any], seed: int,
                        observer=None) -> np.ndarray:
    """Assemble the N x 12 out-of-fold prediction matrix.

    For every fold f, each base model trains on the rows outside f
    (with a seed stream named by fold and model) and predicts the rows
    inside f. `observer`, when given, is called once per (fold, kind)
    training as observer(fold, kind).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = len(X)
    if len(fold_plan.assignments) != n:
        raise ValueError(
            f"fold plan covers {len(fold_plan.assignments)} rows, matrix has {n}")
    meta = np.zeros((n, META_WIDTH), dtype=np.float64)
    for f in range(fold_plan.k):
        inside = fold_plan.members(f)
        outside = fold_plan.complement(f)
        for b, kind in enumerate(BASE_KINDS):
            try:
                model = train_base_model(kind, X[outside], y[outside], params,
                                         seed=derive_seed(seed, f"fold{f}/{kind}"))
                if observer is not None:
                    observer(f, kind)
                meta[inside, 3 * b: 3 * b + 3] = _predict_base(model, X[inside])
            except TrainingError as err:
                raise type(err)(f"fold {f}, model {kind}: {err}") from err
    return meta


@dataclass
class OvrLogReg:
    """Three binary logistic models, one per class, over the 12 meta columns."""

    models: list[BinaryLogRegModel]
    c: float

    def scores(self, M: np.ndarray) -> np.ndarray:
        return np.column_stack([predict_binary_logreg(m, M) for m in self.models])


def train_ovr(M: np.ndarray, y: np.ndarray, c: float, max_iter: int = 5000,
              tol: float = 1e-6) -> OvrLogReg:
    models = [train_binary_logreg(M, (y == k).astype(np.float64), c=c,
                                  max_iter=max_iter, tol=tol)
              for k in range(N_CLASSES)]
    return OvrLogReg(models=models, c=c)


@dataclass
class CseModel:
    base_models: dict  # kind -> fitted base model, all refit on the full data
    meta: OvrLogReg
    params: dict = field(default_factory=dict)
    fold_seed: int = 0
    fold_k: int = 5
    fold_stratified: bool = True
    pipeline: Optional[object] = None  # attached by the training command


def train_cse(X: np.ndarray, y: np.ndarray, params: Mapping[str, Any],
              seed: int, observer=None) -> CseModel:
    """Out-of-fold meta training, then base refits on the full data."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    k = int(params["meta__folds"])
    stratified = bool(params["meta__stratified"])
    fold_seed = derive_seed(seed, "meta-folds")
    plan = make_folds(y, k=k, seed=fold_seed, stratified=stratified)
    M = build_meta_features(X, y, plan, params, seed, observer=observer)
    meta = train_ovr(M, y, c=params["final_estimator__estimator__C"],
                     max_iter=int(params["logreg__max_iter"]),
                     tol=params["logreg__tol"])
    bases = {kind: train_base_model(kind, X, y, params,
                                    seed=derive_seed(seed, f"refit/{kind}"))
             for kind in BASE_KINDS}
    return CseModel(base_models=bases, meta=meta, params=dict(params),
                    fold_seed=fold_seed, fold_k=k, fold_stratified=stratified)


def meta_features_for(model: CseModel, X: np.ndarray) -> np.ndarray:
    """The 12 base-model probability columns for new rows."""
    blocks = [_predict_base(model.base_models[kind], X) for kind in BASE_KINDS]
    return np.hstack(blocks)


def predict_cse_matrix(model: CseModel, X: np.ndarray) -> np.ndarray:
    """Class distributions: per-class sigmoid scores normalized to sum 1."""
    scores = model.meta.scores(meta_features_for(model, np.asarray(X, dtype=np.float64)))
    return scores / scores.sum(axis=1, keepdims=True)


def predict_cse(model: CseModel, text: str,
                embedding: Optional[np.ndarray] = None):
    """Label and distribution for one raw text via the attached pipeline.

    The label is the argmax with the lower class index winning ties.
    """
    from .corpus import Label
    from .pipeline import row_for
    if model.pipeline is None:
        raise TrainingError("this ensemble carries no feature pipeline; "
                            "predict on feature matrices instead")
    row = row_for(model.pipeline, text, embedding)
    dist = predict_cse_matrix(model, row[None, :])[0]
    return Label(int(np.argmax(dist))), dist
