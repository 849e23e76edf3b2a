"""Model registry: hyperparameter schema and uniform train/predict dispatch.

Hyperparameter keys use the double-underscore path style throughout
(`logreg__C`, `lgbm__n_estimators`, ...). Every model kind accepts a
fixed key set; anything else is an UnknownParameter error that lists
what would have been accepted.
"""

from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from .errors import UnknownParameter
from .learners import (predict_adaboost, predict_bagged, predict_knn,
                       predict_knn_labels, predict_logreg, train_adaboost,
                       train_bagged_gbdt, train_knn, train_logreg)
from .learners.adaboost import AdaBoostModel
from .learners.gbdt import BaggedModel
from .learners.knn import KnnModel
from .learners.logreg import LogRegModel

MODEL_KINDS = ("logreg", "knn", "bagged_gbdt", "adaboost", "cse")
BASE_KINDS = ("logreg", "bagged_gbdt", "knn", "adaboost")  # canonical ensemble order

# Defaults are the grid-search winners of the reference experiment plus
# pinned engine knobs.
DEFAULTS: dict[str, Any] = {
    "logreg__C": 0.1,
    "logreg__max_iter": 5000,
    "logreg__tol": 1e-6,
    "lgbm__n_estimators": 50,
    "lgbm__learning_rate": 0.01,
    "gbdt__max_depth": 6,
    "gbdt__min_leaf": 5,
    "bag__n_members": 10,
    "bag__bootstrap": True,
    "knn__n_neighbors": 3,
    "adaboost__n_estimators": 50,
    "adaboost__max_depth": 1,
    "final_estimator__estimator__C": 0.1,
    "meta__folds": 5,
    "meta__stratified": True,
}

_KEYS_BY_KIND: dict[str, frozenset] = {
    "logreg": frozenset({"logreg__C", "logreg__max_iter", "logreg__tol"}),
    "knn": frozenset({"knn__n_neighbors"}),
    "bagged_gbdt": frozenset({"lgbm__n_estimators", "lgbm__learning_rate",
                              "gbdt__max_depth", "gbdt__min_leaf",
                              "bag__n_members", "bag__bootstrap"}),
    "adaboost": frozenset({"adaboost__n_estimators", "adaboost__max_depth"}),
}
_KEYS_BY_KIND["cse"] = (_KEYS_BY_KIND["logreg"] | _KEYS_BY_KIND["knn"]
                        | _KEYS_BY_KIND["bagged_gbdt"] | _KEYS_BY_KIND["adaboost"]
                        | {"final_estimator__estimator__C", "meta__folds",
                           "meta__stratified"})


def valid_keys(kind: str) -> frozenset:
    try:
        return _KEYS_BY_KIND[kind]
    except KeyError:
        raise UnknownParameter(
            f"unknown model kind {kind!r}; expected one of {', '.join(MODEL_KINDS)}"
        ) from None


def resolve_params(kind: str, overrides: Mapping[str, Any] | None = None) -> dict[str, Any]:
    """Merge overrides into the defaults for this kind; reject foreign keys."""
    allowed = valid_keys(kind)
    params = {k: DEFAULTS[k] for k in allowed}
    for key, value in (overrides or {}).items():
        if key not in allowed:
            raise UnknownParameter(
                f"parameter {key!r} is not valid for model {kind!r}; "
                f"valid keys: {', '.join(sorted(allowed))}")
        params[key] = value
    return params


def coerce_param_value(text: str):
    """Parse a command-line parameter value: bool, int, float, else string."""
    lowered = text.strip().lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def train_base_model(kind: str, X: np.ndarray, y: np.ndarray,
                     params: Mapping[str, Any], seed: int):
    """Train one of the four base kinds with already-resolved parameters."""
    if kind == "logreg":
        return train_logreg(X, y, c=params["logreg__C"],
                            max_iter=int(params["logreg__max_iter"]),
                            tol=params["logreg__tol"])
    if kind == "knn":
        return train_knn(X, y, k=int(params["knn__n_neighbors"]))
    if kind == "bagged_gbdt":
        return train_bagged_gbdt(
            X, y,
            n_members=int(params["bag__n_members"]),
            bootstrap=bool(params["bag__bootstrap"]),
            seed=seed,
            n_estimators=int(params["lgbm__n_estimators"]),
            learning_rate=params["lgbm__learning_rate"],
            max_depth=int(params["gbdt__max_depth"]),
            min_leaf=int(params["gbdt__min_leaf"]))
    if kind == "adaboost":
        return train_adaboost(X, y,
                              n_estimators=int(params["adaboost__n_estimators"]),
                              max_depth=int(params["adaboost__max_depth"]))
    raise UnknownParameter(f"{kind!r} is not a base model kind")


def predict_proba(model, X: np.ndarray) -> np.ndarray:
    """Class distributions for any trained model, shape (n, 3)."""
    from .stacking import CseModel, predict_cse_matrix
    if isinstance(model, LogRegModel):
        return predict_logreg(model, X)
    if isinstance(model, KnnModel):
        return predict_knn(model, X)
    if isinstance(model, BaggedModel):
        return predict_bagged(model, X)
    if isinstance(model, AdaBoostModel):
        return predict_adaboost(model, X)
    if isinstance(model, CseModel):
        return predict_cse_matrix(model, X)
    raise TypeError(f"cannot predict with {type(model).__name__}")


def predict_labels(model, X: np.ndarray) -> np.ndarray:
    """Label decisions; KNN uses its own tie chain, everything else argmax."""
    if isinstance(model, KnnModel):
        return predict_knn_labels(model, X)
    return np.argmax(predict_proba(model, X), axis=1)


def train_model(kind: str, X: np.ndarray, y: np.ndarray,
                params: Mapping[str, Any] | None, seed: int):
    """Train any of the five kinds. Parameters are resolved against defaults."""
    resolved = resolve_params(kind, params)
    if kind == "cse":
        from .stacking import train_cse
        return train_cse(X, y, resolved, seed)
    return train_base_model(kind, X, y, resolved, seed)
