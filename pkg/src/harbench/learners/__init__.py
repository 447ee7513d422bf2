"""Five from-scratch classifiers behind one train/predict contract."""
from __future__ import annotations

import numpy as np

from ..dataset import LabeledDataset
from ._base import (
    DEFAULT_PARAMS,
    MODEL_KINDS,
    ModelSpec,
    TrainedModel,
    derive_model_seed,
)
from .decision_tree import DecisionTreeModel, train_decision_tree
from .gradient_boost import GradientBoostModel, train_gradient_boost
from .io import load_model, save_model
from .logistic import LogisticRegressionModel, loss_and_grad, softmax, train_logistic
from .naive_bayes import NaiveBayesModel, train_naive_bayes
from .random_forest import RandomForestModel, train_random_forest

_TRAINERS = {
    "decision_tree": train_decision_tree,
    "random_forest": train_random_forest,
    "naive_bayes": train_naive_bayes,
    "logistic_regression": train_logistic,
    "gradient_boost": train_gradient_boost,
}


def train(spec: ModelSpec, ds: LabeledDataset) -> TrainedModel:
    """Fit the classifier described by `spec` on the dataset.

    Deterministic: the same spec (including seed) and dataset produce a
    bit-identical model.
    """
    return _TRAINERS[spec.kind](spec, ds)


def predict(model: TrainedModel, features) -> int:
    """Predicted class code for one feature vector."""
    return model.predict(np.asarray(features, dtype=np.float64))


def predict_scores(model: TrainedModel, features) -> np.ndarray:
    """Class-score vector (sums to 1) for one feature vector."""
    return model.predict_scores(np.asarray(features, dtype=np.float64))


__all__ = [
    "DEFAULT_PARAMS",
    "MODEL_KINDS",
    "ModelSpec",
    "TrainedModel",
    "DecisionTreeModel",
    "RandomForestModel",
    "NaiveBayesModel",
    "LogisticRegressionModel",
    "GradientBoostModel",
    "train",
    "predict",
    "predict_scores",
    "save_model",
    "load_model",
    "derive_model_seed",
    "loss_and_grad",
    "softmax",
]
