"""Softmax and binary logistic regression with backtracking gradient descent.

The objective for the multiclass model is

    L(W, b) = mean cross-entropy + ||W||^2 / (2 c N)

with an unregularized bias. Optimization is full-batch gradient descent
with an Armijo backtracking line search, stopping when the infinity norm
of the gradient drops below the tolerance or the iteration cap hits.
The binary variant shares the same loop and is what the ensemble's
one-vs-rest meta model trains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import DimMismatch, NonFiniteLoss, SingleClass

ARMIJO_C1 = 1e-4
MIN_STEP = 1e-12


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _descend(value_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
             theta: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int, bool]:
    """Backtracking gradient descent on a flat parameter vector.

    Returns (theta, iterations, converged). Raises NonFiniteLoss if the
    objective or gradient ever leaves the reals.
    """
    loss, grad = value_and_grad(theta)
    if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
        raise NonFiniteLoss("objective is non-finite at the starting point")
    step = 1.0
    for it in range(max_iter):
        gnorm = float(np.max(np.abs(grad)))
        if gnorm < tol:
            return theta, it, True
        gsq = float(np.dot(grad, grad))
        while True:
            candidate = theta - step * grad
            new_loss, new_grad = value_and_grad(candidate)
            if np.isfinite(new_loss) and new_loss <= loss - ARMIJO_C1 * step * gsq:
                break
            step *= 0.5
            if step < MIN_STEP:
                # descent direction exhausted at float precision; accept where we are
                return theta, it, False
        if not np.all(np.isfinite(new_grad)):
            raise NonFiniteLoss(f"gradient became non-finite at iteration {it}")
        theta, loss, grad = candidate, new_loss, new_grad
        step = min(step * 2.0, 1e6)
    return theta, max_iter, False


@dataclass
class LogRegModel:
    weights: np.ndarray  # (n_classes, dim)
    bias: np.ndarray  # (n_classes,)
    c: float
    n_iter: int = 0
    converged: bool = False

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def _check_training_inputs(X: np.ndarray, y: np.ndarray, c: float) -> None:
    if c <= 0:
        raise ValueError(f"inverse regularization c must be positive, got {c}")
    if len(X) != len(y):
        raise ValueError(f"{len(X)} rows against {len(y)} labels")
    if len(np.unique(y)) < 2:
        raise SingleClass("training labels contain a single class")


def softmax_objective(X: np.ndarray, y: np.ndarray, c: float, n_classes: int):
    """Value-and-gradient closure over flattened (W, b)."""
    n, d = X.shape
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    reg = 1.0 / (2.0 * c * n)

    def value_and_grad(theta: np.ndarray) -> tuple[float, np.ndarray]:
        W = theta[: n_classes * d].reshape(n_classes, d)
        b = theta[n_classes * d:]
        logits = X @ W.T + b
        logp = _log_softmax(logits)
        loss = -float(logp[np.arange(n), y].mean()) + reg * float(np.sum(W * W))
        delta = (np.exp(logp) - onehot) / n  # (n, k)
        grad_w = delta.T @ X + (2.0 * reg) * W
        grad_b = delta.sum(axis=0)
        return loss, np.concatenate([grad_w.ravel(), grad_b])

    return value_and_grad


def train_logreg(X: np.ndarray, y: np.ndarray, c: float = 0.1,
                 max_iter: int = 5000, tol: float = 1e-6,
                 n_classes: int = 3) -> LogRegModel:
    """Fit the softmax model from a zero start."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    _check_training_inputs(X, y, c)
    n, d = X.shape
    theta0 = np.zeros(n_classes * d + n_classes)
    theta, iters, converged = _descend(
        softmax_objective(X, y, c, n_classes), theta0, tol, max_iter)
    return LogRegModel(
        weights=theta[: n_classes * d].reshape(n_classes, d).copy(),
        bias=theta[n_classes * d:].copy(),
        c=c, n_iter=iters, converged=converged)


def predict_logreg(model: LogRegModel, X: np.ndarray) -> np.ndarray:
    """Class distributions, shape (n, n_classes)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != model.dim:
        raise DimMismatch(f"rows of width {X.shape[1]} against model of width {model.dim}")
    return softmax(X @ model.weights.T + model.bias)


@dataclass
class BinaryLogRegModel:
    weights: np.ndarray  # (dim,)
    bias: float
    c: float
    n_iter: int = 0
    converged: bool = False


def binary_objective(X: np.ndarray, y01: np.ndarray, c: float):
    """Value-and-gradient closure for sigmoid cross-entropy over flat (w, b)."""
    n, d = X.shape
    reg = 1.0 / (2.0 * c * n)

    def value_and_grad(theta: np.ndarray) -> tuple[float, np.ndarray]:
        w = theta[:d]
        b = theta[d]
        z = X @ w + b
        # log(1 + e^z) - y z, computed stably on both tails
        loss = float(np.mean(np.logaddexp(0.0, z) - y01 * z)) + reg * float(w @ w)
        p = np.exp(-np.logaddexp(0.0, -z))  # sigmoid, stable on both tails
        delta = (p - y01) / n
        grad_w = X.T @ delta + (2.0 * reg) * w
        grad_b = float(delta.sum())
        return loss, np.concatenate([grad_w, [grad_b]])

    return value_and_grad


def train_binary_logreg(X: np.ndarray, y01: np.ndarray, c: float = 0.1,
                        max_iter: int = 5000, tol: float = 1e-6) -> BinaryLogRegModel:
    """Fit one sigmoid model; y01 holds 0/1 targets."""
    X = np.asarray(X, dtype=np.float64)
    y01 = np.asarray(y01, dtype=np.float64)
    if c <= 0:
        raise ValueError(f"inverse regularization c must be positive, got {c}")
    if len(X) != len(y01):
        raise ValueError(f"{len(X)} rows against {len(y01)} labels")
    n, d = X.shape
    theta, iters, converged = _descend(
        binary_objective(X, y01, c), np.zeros(d + 1), tol, max_iter)
    return BinaryLogRegModel(weights=theta[:d].copy(), bias=float(theta[d]),
                             c=c, n_iter=iters, converged=converged)


def predict_binary_logreg(model: BinaryLogRegModel, X: np.ndarray) -> np.ndarray:
    """P(positive class) per row."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != len(model.weights):
        raise DimMismatch(
            f"rows of width {X.shape[1]} against model of width {len(model.weights)}")
    return 1.0 / (1.0 + np.exp(-(X @ model.weights + model.bias)))
