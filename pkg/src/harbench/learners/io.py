"""Model file serialization on the shared binary container."""
from __future__ import annotations

import numpy as np

from ..container import read_container, write_container
from ..errors import FileFormatError
from ..preprocess import StandardizeParams
from ._base import ModelSpec, TrainedModel
from ._grower import Tree
from .decision_tree import DecisionTreeModel
from .gradient_boost import GradientBoostModel
from .logistic import LogisticRegressionModel
from .naive_bayes import NaiveBayesModel
from .random_forest import RandomForestModel

MODEL_MAGIC = b"HARMODL1"


def _pack_trees(trees: list[Tree]) -> dict[str, np.ndarray]:
    offsets = np.zeros(len(trees) + 1, dtype=np.int64)
    for i, t in enumerate(trees):
        offsets[i + 1] = offsets[i] + t.n_nodes
    return {
        "tree_offsets": offsets,
        "feature": np.concatenate([t.feature for t in trees]),
        "threshold": np.concatenate([t.threshold for t in trees]),
        "left": np.concatenate([t.left for t in trees]),
        "right": np.concatenate([t.right for t in trees]),
        "value": np.vstack([t.value for t in trees]),
    }


def _unpack_trees(arrays: dict[str, np.ndarray]) -> list[Tree]:
    offsets = arrays["tree_offsets"]
    trees = []
    for i in range(offsets.shape[0] - 1):
        lo, hi = int(offsets[i]), int(offsets[i + 1])
        trees.append(Tree(
            feature=arrays["feature"][lo:hi],
            threshold=arrays["threshold"][lo:hi],
            left=arrays["left"][lo:hi],
            right=arrays["right"][lo:hi],
            value=arrays["value"][lo:hi],
        ))
    return trees


def save_model(model: TrainedModel, path) -> None:
    header = {
        "kind": model.kind,
        "spec": model.spec.to_dict(),
        "class_codes": [int(c) for c in model.class_codes],
        "n_features": model.n_features,
        "meta": {},
    }
    arrays: dict[str, np.ndarray] = {}
    if model.scaler is not None:
        arrays["scaler_mean"] = model.scaler.mean
        arrays["scaler_std"] = model.scaler.std

    if isinstance(model, DecisionTreeModel):
        arrays.update(_pack_trees([model.tree]))
    elif isinstance(model, RandomForestModel):
        arrays.update(_pack_trees(model.trees))
    elif isinstance(model, NaiveBayesModel):
        arrays["log_priors"] = model.log_priors
        arrays["means"] = model.means
        arrays["variances"] = model.variances
    elif isinstance(model, LogisticRegressionModel):
        arrays["weights"] = model.weights
    elif isinstance(model, GradientBoostModel):
        flat = [t for round_trees in model.trees for t in round_trees]
        arrays.update(_pack_trees(flat))
        header["meta"] = {
            "n_rounds": len(model.trees),
            "n_logits": model.n_logits,
            "learning_rate": model.learning_rate,
            "loss_history": model.loss_history,
        }
    else:
        raise FileFormatError(f"cannot serialize model type {type(model).__name__}")
    write_container(path, MODEL_MAGIC, header, arrays)


def load_model(path) -> TrainedModel:
    header, arrays = read_container(path, MODEL_MAGIC)
    try:
        kind = header["kind"]
        spec = ModelSpec.from_dict(header["spec"])
        codes = np.asarray(header["class_codes"], dtype=np.int64)
        n_features = int(header["n_features"])
        meta = header.get("meta", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed model header: {exc}") from exc

    scaler = None
    if "scaler_mean" in arrays:
        scaler = StandardizeParams(mean=arrays["scaler_mean"], std=arrays["scaler_std"])

    if kind == "decision_tree":
        tree = _unpack_trees(arrays)[0]
        return DecisionTreeModel(spec, codes, n_features, tree)
    if kind == "random_forest":
        return RandomForestModel(spec, codes, n_features, _unpack_trees(arrays))
    if kind == "naive_bayes":
        return NaiveBayesModel(spec, codes, n_features,
                               arrays["log_priors"], arrays["means"], arrays["variances"])
    if kind == "logistic_regression":
        return LogisticRegressionModel(spec, codes, n_features,
                                       arrays["weights"], scaler=scaler)
    if kind == "gradient_boost":
        flat = _unpack_trees(arrays)
        n_logits = int(meta["n_logits"])
        rounds = [flat[i:i + n_logits] for i in range(0, len(flat), n_logits)]
        return GradientBoostModel(spec, codes, n_features, rounds,
                                  float(meta["learning_rate"]),
                                  list(meta.get("loss_history", [])))
    raise FileFormatError(f"{path}: unknown model kind {kind!r}")
