"""Multinomial logistic regression fit by full-batch gradient descent.

The weight matrix is K x (d+1) with the bias in column 0; L2 decay
applies to the non-bias entries only. Features are standardized inside
the model by default (the stored scaler is replayed at predict time).
"""
from __future__ import annotations

import numpy as np

from ..dataset import LabeledDataset
from ..errors import DivergenceError
from ..preprocess import standardize
from ._base import ModelSpec, TrainedModel, canonical_row_order, check_training_input


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grad(W: np.ndarray, Xb: np.ndarray, y_index: np.ndarray,
                  l2: float) -> tuple[float, np.ndarray]:
    """Mean cross-entropy with L2 on non-bias weights, and its gradient.

    Xb is the bias-augmented design matrix (n, d+1); W is (K, d+1).
    """
    n = Xb.shape[0]
    # Divergence shows up as inf/nan loss, which the caller reports; keep
    # the overflow itself quiet.
    with np.errstate(over="ignore", invalid="ignore"):
        P = softmax(Xb @ W.T)
        rows = np.arange(n)
        eps = np.finfo(np.float64).tiny
        loss = -np.mean(np.log(P[rows, y_index] + eps))
        loss += 0.5 * l2 * float((W[:, 1:] ** 2).sum())
        G = P.copy()
        G[rows, y_index] -= 1.0
        grad = G.T @ Xb / n
        grad[:, 1:] += l2 * W[:, 1:]
    return float(loss), grad


class LogisticRegressionModel(TrainedModel):
    kind = "logistic_regression"

    def __init__(self, spec: ModelSpec, class_codes, n_features, weights, scaler=None):
        super().__init__(spec, class_codes, n_features, scaler=scaler)
        self.weights = weights  # (K, d+1), bias in column 0

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        Xb = np.hstack([np.ones((X.shape[0], 1)), X])
        return softmax(Xb @ self.weights.T)


def train_logistic(spec: ModelSpec, ds: LabeledDataset) -> LogisticRegressionModel:
    X, y, codes = check_training_input(ds, spec.kind)
    # Canonical row order keeps the full-batch fit bit-identical no matter
    # how the training rows were shuffled.
    order = canonical_row_order(X, y)
    X, y = X[order], y[order]
    p = spec.resolved_params()
    scaler = None
    if p["standardize"]:
        scaled, _, scaler = standardize(ds.take(order))
        X = scaled.matrix
    n, d = X.shape
    Xb = np.hstack([np.ones((n, 1)), X])
    W = np.zeros((codes.size, d + 1))
    lr = float(p["learning_rate"])
    tol = float(p["grad_tol"])
    for epoch in range(int(p["epochs"])):
        loss, grad = loss_and_grad(W, Xb, y, float(p["l2"]))
        if not np.isfinite(loss):
            raise DivergenceError(
                f"logistic_regression: non-finite loss at epoch {epoch} "
                f"(learning rate {lr} too high?)", epoch=epoch,
            )
        gnorm = float(np.sqrt((grad * grad).sum()))
        if gnorm <= tol:
            break
        W -= lr * grad
    return LogisticRegressionModel(spec, codes, d, W, scaler=scaler)
