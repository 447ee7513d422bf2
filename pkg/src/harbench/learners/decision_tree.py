"""Single CART classification tree."""
from __future__ import annotations

import numpy as np

from ..dataset import LabeledDataset
from ._base import ModelSpec, TrainedModel, check_training_input
from ._grower import Tree, grow_classification_tree


class DecisionTreeModel(TrainedModel):
    kind = "decision_tree"

    def __init__(self, spec: ModelSpec, class_codes, n_features, tree: Tree):
        super().__init__(spec, class_codes, n_features)
        self.tree = tree

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        return self.tree.predict_value(X)


def train_decision_tree(spec: ModelSpec, ds: LabeledDataset) -> DecisionTreeModel:
    X, y, codes = check_training_input(ds, spec.kind)
    p = spec.resolved_params()
    tree = grow_classification_tree(
        X, y, codes.size,
        max_depth=p["max_depth"],
        min_samples_leaf=p["min_samples_leaf"],
    )
    return DecisionTreeModel(spec, codes, X.shape[1], tree)
