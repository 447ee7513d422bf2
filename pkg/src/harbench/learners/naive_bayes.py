"""Gaussian naive Bayes with log-space posterior arithmetic."""
from __future__ import annotations

import numpy as np

from ..dataset import LabeledDataset
from ._base import ModelSpec, TrainedModel, canonical_row_order, check_training_input

_CHUNK = 1 << 16


class NaiveBayesModel(TrainedModel):
    kind = "naive_bayes"

    def __init__(self, spec: ModelSpec, class_codes, n_features,
                 log_priors, means, variances):
        super().__init__(spec, class_codes, n_features)
        self.log_priors = log_priors      # (K,)
        self.means = means                # (K, d)
        self.variances = variances        # (K, d), already floored

    def _log_posterior(self, X: np.ndarray) -> np.ndarray:
        out = np.empty((X.shape[0], self.n_classes))
        const = -0.5 * np.log(2.0 * np.pi * self.variances).sum(axis=1)
        for start in range(0, X.shape[0], _CHUNK):
            block = X[start:start + _CHUNK]
            diff = block[:, None, :] - self.means[None, :, :]
            quad = -0.5 * (diff * diff / self.variances[None, :, :]).sum(axis=2)
            out[start:start + _CHUNK] = self.log_priors + const + quad
        return out

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        lp = self._log_posterior(X)
        lp -= lp.max(axis=1, keepdims=True)
        p = np.exp(lp)
        return p / p.sum(axis=1, keepdims=True)


def train_naive_bayes(spec: ModelSpec, ds: LabeledDataset) -> NaiveBayesModel:
    X, y, codes = check_training_input(ds, spec.kind)
    # Canonical row order makes the fitted moments independent of how the
    # training rows were shuffled (float sums are order-sensitive).
    order = canonical_row_order(X, y)
    X, y = X[order], y[order]
    p = spec.resolved_params()
    K, d = codes.size, X.shape[1]
    means = np.empty((K, d))
    variances = np.empty((K, d))
    counts = np.empty(K)
    # Floor class variances relative to the global per-feature spread so a
    # within-class constant feature cannot zero out the density.
    floor = p["var_smoothing"] * (X.var(axis=0) + 1e-12)
    for k in range(K):
        rows = X[y == k]
        counts[k] = rows.shape[0]
        means[k] = rows.mean(axis=0)
        variances[k] = np.maximum(rows.var(axis=0), floor)
    log_priors = np.log(counts / counts.sum())
    return NaiveBayesModel(spec, codes, d, log_priors, means, variances)
