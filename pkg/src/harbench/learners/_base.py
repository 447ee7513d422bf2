"""Model specification and the shared train/predict contract.

Every classifier trains from a LabeledDataset and exposes class-score
vectors over its sorted class codes. predict() is the argmax of
predict_scores() with ties broken toward the lowest class code.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..dataset import LabeledDataset
from ..errors import ConfigError, DimensionMismatchError, EmptyInputError, SchemaError
from ..preprocess import StandardizeParams

MODEL_KINDS = (
    "decision_tree",
    "random_forest",
    "naive_bayes",
    "logistic_regression",
    "gradient_boost",
)

# Hyperparameter defaults. The study behind this toolkit names the five
# models but none of their settings, so these are documented choices:
# tree depths sized for 12 activity classes, boosting mirroring common
# XGBoost defaults.
DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "decision_tree": {
        "max_depth": 12,
        "min_samples_leaf": 5,
    },
    "random_forest": {
        "n_trees": 100,
        "max_depth": 12,
        "min_samples_leaf": 5,
        "bootstrap": True,
        "max_features": "sqrt",
        "n_jobs": 1,
    },
    "naive_bayes": {
        "var_smoothing": 1e-9,
    },
    "logistic_regression": {
        "learning_rate": 0.1,
        "epochs": 300,
        "l2": 1e-4,
        "grad_tol": 1e-10,
        "standardize": True,
    },
    "gradient_boost": {
        "n_rounds": 100,
        "max_depth": 6,
        "learning_rate": 0.3,
        "reg_lambda": 1.0,
        "gamma": 0.0,
        "min_child_hessian": 1.0,
        "n_jobs": 1,
    },
}


def _validate_params(kind: str, p: dict[str, Any]) -> None:
    def require(cond: bool, msg: str):
        if not cond:
            raise ConfigError(f"{kind}: {msg}")

    if kind in ("decision_tree", "random_forest"):
        require(int(p["max_depth"]) >= 1, "max_depth must be >= 1")
        require(int(p["min_samples_leaf"]) >= 1, "min_samples_leaf must be >= 1")
    if kind == "random_forest":
        require(int(p["n_trees"]) >= 1, "n_trees must be >= 1")
        mf = p["max_features"]
        require(mf in (None, "sqrt") or (isinstance(mf, int) and mf >= 1),
                "max_features must be None, 'sqrt', or a positive int")
    if kind == "naive_bayes":
        require(float(p["var_smoothing"]) > 0, "var_smoothing must be > 0")
    if kind == "logistic_regression":
        require(float(p["learning_rate"]) > 0, "learning_rate must be > 0")
        require(int(p["epochs"]) >= 0, "epochs must be >= 0")
        require(float(p["l2"]) >= 0, "l2 must be >= 0")
    if kind == "gradient_boost":
        require(int(p["n_rounds"]) >= 0, "n_rounds must be >= 0")
        require(int(p["max_depth"]) >= 0, "max_depth must be >= 0")
        # learning_rate 0 is allowed and yields the base-score predictor.
        require(float(p["learning_rate"]) >= 0, "learning_rate must be >= 0")
        require(float(p["reg_lambda"]) > 0, "reg_lambda must be > 0")
        require(float(p["gamma"]) >= 0, "gamma must be >= 0")
        require(float(p["min_child_hessian"]) >= 0, "min_child_hessian must be >= 0")


@dataclass(frozen=True)
class ModelSpec:
    """Declarative classifier configuration: kind, hyperparameters, seed."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r} (choose from {MODEL_KINDS})")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.kind])
        if unknown:
            raise ConfigError(f"{self.kind}: unknown hyperparameters {sorted(unknown)}")
        object.__setattr__(self, "params", dict(self.params))
        _validate_params(self.kind, self.resolved_params())

    def resolved_params(self) -> dict[str, Any]:
        merged = dict(DEFAULT_PARAMS[self.kind])
        merged.update(self.params)
        return merged

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @staticmethod
    def from_dict(d: dict) -> "ModelSpec":
        return ModelSpec(kind=d["kind"], params=d.get("params", {}), seed=d.get("seed", 0))


def derive_model_seed(global_seed: int, kind: str) -> int:
    """Stable 63-bit seed for one model of a comparison run."""
    digest = hashlib.sha256(f"{global_seed}:{kind}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


class TrainedModel:
    """Common fitted-model behavior; subclasses fill in score_matrix()."""

    kind: str = ""

    def __init__(self, spec: ModelSpec, class_codes, n_features: int,
                 scaler: StandardizeParams | None = None):
        self.spec = spec
        self.class_codes = np.asarray(class_codes, dtype=np.int64)
        if self.class_codes.size == 0:
            raise EmptyInputError("class_codes must be non-empty")
        if np.unique(self.class_codes).size != self.class_codes.size:
            raise SchemaError("class_codes must be duplicate-free")
        self.n_features = int(n_features)
        self.scaler = scaler

    @property
    def n_classes(self) -> int:
        return self.class_codes.shape[0]

    def _prepare(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatchError(
                f"expected {self.n_features} features, got shape {X.shape}"
            )
        if X.size and not np.isfinite(X).all():
            raise SchemaError("features must be finite")
        if self.scaler is not None:
            X = self.scaler.apply(X)
        return X

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        """(n, K) class scores for already-prepared rows. Subclass hook."""
        raise NotImplementedError

    def predict_scores(self, X) -> np.ndarray:
        """Class-score vectors over class_codes; rows sum to 1."""
        prepared = self._prepare(X)
        scores = self.score_matrix(prepared)
        return scores[0] if np.asarray(X).ndim == 1 else scores

    def predict(self, X):
        """Predicted class code(s): argmax score, lowest code on ties."""
        prepared = self._prepare(X)
        scores = self.score_matrix(prepared)
        codes = self.class_codes[np.argmax(scores, axis=1)]
        return int(codes[0]) if np.asarray(X).ndim == 1 else codes


def check_training_input(ds: LabeledDataset, kind: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shared preflight: non-empty, finite, class-count preconditions.

    Returns (X, y_index, class_codes) with labels re-encoded as indices
    into the sorted class-code vector.
    """
    if ds.n_rows == 0:
        raise EmptyInputError(f"{kind}: cannot train on an empty dataset")
    X = ds.matrix
    if not np.isfinite(X).all():
        raise SchemaError(f"{kind}: training features must be finite")
    class_codes = np.unique(ds.labels).astype(np.int64)
    if kind in ("logistic_regression", "gradient_boost") and class_codes.size < 2:
        raise SchemaError(f"{kind}: needs >= 2 classes, got {class_codes.size}")
    y_index = np.searchsorted(class_codes, ds.labels.astype(np.int64))
    return X, y_index, class_codes


def canonical_row_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Lexicographic row permutation, so full-batch trainers can be made
    bit-for-bit invariant to the order training rows arrive in."""
    keys = (y,) + tuple(X[:, f] for f in range(X.shape[1] - 1, -1, -1))
    return np.lexsort(keys)
