"""Second-order gradient-boosted trees (XGBoost-style exact greedy).

Multiclass training fits one regression tree per class per round against
the softmax log-loss gradients g_i = p_ic - 1[y_i=c] and Hessians
h_i = p_ic (1 - p_ic), updating that class's logit additively. A
two-class problem collapses to a single sigmoid logit with one tree per
round (the class-0 tree would be its exact mirror image). Base logits
are zero, so zero rounds predicts the uniform distribution.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..dataset import LabeledDataset
from ._base import ModelSpec, TrainedModel, check_training_input
from ._grower import Tree, grow_regression_tree, presort_columns
from .logistic import softmax


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class GradientBoostModel(TrainedModel):
    kind = "gradient_boost"

    def __init__(self, spec: ModelSpec, class_codes, n_features,
                 trees: list[list[Tree]], learning_rate: float,
                 loss_history: list[float]):
        super().__init__(spec, class_codes, n_features)
        self.trees = trees  # trees[round] = one Tree per logit
        self.learning_rate = float(learning_rate)
        self.loss_history = list(loss_history)

    @property
    def n_logits(self) -> int:
        return 1 if self.n_classes == 2 else self.n_classes

    def logits(self, X: np.ndarray) -> np.ndarray:
        F = np.zeros((X.shape[0], self.n_logits))
        for round_trees in self.trees:
            for c, tree in enumerate(round_trees):
                F[:, c] += self.learning_rate * tree.predict_value(X)[:, 0]
        return F

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        F = self.logits(X)
        if self.n_classes == 2:
            p = _sigmoid(F[:, 0])
            return np.column_stack([1.0 - p, p])
        return softmax(F)


def _train_loss(P: np.ndarray, y: np.ndarray) -> float:
    eps = np.finfo(np.float64).tiny
    return float(-np.mean(np.log(P[np.arange(y.shape[0]), y] + eps)))


def train_gradient_boost(spec: ModelSpec, ds: LabeledDataset) -> GradientBoostModel:
    X, y, codes = check_training_input(ds, spec.kind)
    p = spec.resolved_params()
    n = X.shape[0]
    K = codes.size
    lr = float(p["learning_rate"])
    n_rounds = int(p["n_rounds"])
    n_jobs = int(p["n_jobs"])
    binary = K == 2
    n_logits = 1 if binary else K

    presort = presort_columns(X)
    grow_kwargs = dict(
        max_depth=int(p["max_depth"]),
        reg_lambda=float(p["reg_lambda"]),
        gamma=float(p["gamma"]),
        min_child_hessian=float(p["min_child_hessian"]),
        presort=presort,
    )

    F = np.zeros((n, n_logits))
    trees: list[list[Tree]] = []
    loss_history: list[float] = []

    def fit_one(grad, hess):
        return grow_regression_tree(X, grad, hess,
                                    return_leaf_assignment=True, **grow_kwargs)

    for _ in range(n_rounds):
        if binary:
            prob_pos = _sigmoid(F[:, 0])
            P = np.column_stack([1.0 - prob_pos, prob_pos])
        else:
            P = softmax(F)
        loss_history.append(_train_loss(P, y))

        if binary:
            g = prob_pos - (y == 1)
            h = prob_pos * (1.0 - prob_pos)
            tree, leaves = fit_one(g, h)
            F[:, 0] += lr * tree.value[leaves, 0]
            trees.append([tree])
        else:
            grads = P - np.eye(K)[y]
            hess = P * (1.0 - P)
            if n_jobs > 1:
                with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                    fitted = list(pool.map(
                        lambda c: fit_one(grads[:, c], hess[:, c]), range(K)))
            else:
                fitted = [fit_one(grads[:, c], hess[:, c]) for c in range(K)]
            round_trees = []
            for c, (tree, leaves) in enumerate(fitted):
                F[:, c] += lr * tree.value[leaves, 0]
                round_trees.append(tree)
            trees.append(round_trees)

    if binary:
        P = np.column_stack([1.0 - _sigmoid(F[:, 0]), _sigmoid(F[:, 0])])
    else:
        P = softmax(F)
    loss_history.append(_train_loss(P, y))

    return GradientBoostModel(spec, codes, X.shape[1], trees, lr, loss_history)
