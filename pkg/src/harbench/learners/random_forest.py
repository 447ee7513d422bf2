"""Random forest of CART trees with soft-vote averaging.

Each tree's RNG is seeded from (model seed, tree index), so growing the
forest by raising n_trees never reshuffles earlier trees, and training
may run trees on worker threads without changing the result.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..dataset import LabeledDataset
from ._base import ModelSpec, TrainedModel, check_training_input
from ._grower import Tree, grow_classification_tree, presort_columns


class RandomForestModel(TrainedModel):
    kind = "random_forest"

    def __init__(self, spec: ModelSpec, class_codes, n_features, trees: list[Tree]):
        super().__init__(spec, class_codes, n_features)
        self.trees = trees

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros((X.shape[0], self.n_classes))
        for tree in self.trees:
            total += tree.predict_value(X)
        return total / len(self.trees)


def _resolve_mtry(max_features, d: int) -> int:
    if max_features is None:
        return d
    if max_features == "sqrt":
        return math.ceil(math.sqrt(d))
    return min(int(max_features), d)


def train_random_forest(spec: ModelSpec, ds: LabeledDataset) -> RandomForestModel:
    X, y, codes = check_training_input(ds, spec.kind)
    p = spec.resolved_params()
    n = X.shape[0]
    mtry = _resolve_mtry(p["max_features"], X.shape[1])
    presort = presort_columns(X)  # shared by all trees

    def grow_one(t: int) -> Tree:
        rng = np.random.default_rng([spec.seed, t])
        if p["bootstrap"]:
            picks = rng.integers(0, n, size=n)
            weight = np.bincount(picks, minlength=n).astype(np.float64)
        else:
            weight = None
        return grow_classification_tree(
            X, y, codes.size,
            max_depth=p["max_depth"],
            min_samples_leaf=p["min_samples_leaf"],
            sample_weight=weight,
            max_features=None if mtry == X.shape[1] else mtry,
            rng=rng,
            presort=presort,
        )

    n_trees = int(p["n_trees"])
    n_jobs = int(p["n_jobs"])
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(grow_one, range(n_trees)))
    else:
        trees = [grow_one(t) for t in range(n_trees)]
    return RandomForestModel(spec, codes, X.shape[1], trees)
