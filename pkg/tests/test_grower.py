import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from harbench.learners._grower import (
    grow_classification_tree,
    grow_regression_tree,
    presort_columns,
)

import oracles

XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_Y = np.array([0, 1, 1, 0])


class TestClassificationGrower:
    def test_gini_formula_spot_checks(self):
        assert oracles.gini_impurity(np.array([0, 0, 1, 1]), 2) == 0.5
        assert oracles.gini_impurity(np.array([1, 1, 1]), 2) == 0.0

    def test_xor_depth2_memorizes(self):
        tree = grow_classification_tree(XOR_X, XOR_Y, 2, max_depth=2, min_samples_leaf=1)
        pred = np.argmax(tree.predict_value(XOR_X), axis=1)
        assert (pred == XOR_Y).all()

    def test_xor_depth1_matches_best_stump(self):
        tree = grow_classification_tree(XOR_X, XOR_Y, 2, max_depth=1, min_samples_leaf=1)
        pred = np.argmax(tree.predict_value(XOR_X), axis=1)
        assert (pred == XOR_Y).mean() == oracles.best_stump_accuracy(XOR_X, XOR_Y) == 0.5

    def test_root_split_matches_enumeration(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 21))
            d = int(rng.integers(1, 4))
            k = int(rng.integers(2, 5))
            X = np.round(rng.normal(size=(n, d)), 1)
            y = rng.integers(0, k, n)
            tree = grow_classification_tree(X, y, k, max_depth=1, min_samples_leaf=1)
            if tree.feature[0] >= 0:
                achieved = oracles.gini_reduction(
                    X, y, k, int(tree.feature[0]), float(tree.threshold[0]))
            else:
                achieved = 0.0
            assert abs(achieved - oracles.best_split_by_enumeration(X, y, k)) <= 1e-12

    def test_pure_node_is_leaf(self):
        X = np.arange(10.0)[:, None]
        y = np.zeros(10, dtype=int)
        tree = grow_classification_tree(X, y, 1, max_depth=5, min_samples_leaf=1)
        assert tree.n_nodes == 1
        assert tree.feature[0] == -1
        assert tree.value[0].tolist() == [1.0]

    def test_min_samples_leaf_respected(self, rng):
        X = rng.normal(size=(80, 3))
        y = rng.integers(0, 3, 80)
        tree = grow_classification_tree(X, y, 3, max_depth=20, min_samples_leaf=7)
        leaves = tree.apply(X)
        for leaf, count in zip(*np.unique(leaves, return_counts=True)):
            assert count >= 7

    def test_weighted_equals_row_repetition(self, rng):
        X = rng.normal(size=(40, 3))
        y = rng.integers(0, 3, 40)
        w = rng.integers(0, 4, 40).astype(float)
        rep = np.repeat(np.arange(40), w.astype(int))
        ta = grow_classification_tree(X, y, 3, max_depth=6, min_samples_leaf=2,
                                      sample_weight=w)
        tb = grow_classification_tree(X[rep], y[rep], 3, max_depth=6, min_samples_leaf=2)
        probe = rng.normal(size=(300, 3))
        assert np.array_equal(ta.predict_value(probe), tb.predict_value(probe))

    def test_deterministic(self, rng):
        X = rng.normal(size=(60, 4))
        y = rng.integers(0, 4, 60)
        t1 = grow_classification_tree(X, y, 4, max_depth=8, min_samples_leaf=2)
        t2 = grow_classification_tree(X, y, 4, max_depth=8, min_samples_leaf=2)
        assert np.array_equal(t1.feature, t2.feature)
        assert np.array_equal(t1.threshold, t2.threshold, equal_nan=True)
        assert np.array_equal(t1.value, t2.value)

    def test_feature_subsampling_uses_rng_deterministically(self, rng):
        X = rng.normal(size=(100, 6))
        y = rng.integers(0, 3, 100)
        t1 = grow_classification_tree(X, y, 3, max_depth=4, min_samples_leaf=2,
                                      max_features=2, rng=np.random.default_rng(5))
        t2 = grow_classification_tree(X, y, 3, max_depth=4, min_samples_leaf=2,
                                      max_features=2, rng=np.random.default_rng(5))
        t3 = grow_classification_tree(X, y, 3, max_depth=4, min_samples_leaf=2,
                                      max_features=2, rng=np.random.default_rng(6))
        assert np.array_equal(t1.feature, t2.feature)
        assert not np.array_equal(t1.feature, t3.feature) or \
            not np.array_equal(t1.threshold, t3.threshold)

    def test_leaf_assignment_matches_apply(self, rng):
        X = rng.normal(size=(50, 2))
        y = rng.integers(0, 2, 50)
        tree, leaves = grow_classification_tree(
            X, y, 2, max_depth=4, min_samples_leaf=1, return_leaf_assignment=True)
        assert np.array_equal(leaves, tree.apply(X))

    def test_duplicate_feature_rows_cannot_split(self):
        X = np.ones((6, 2))
        y = np.array([0, 1, 0, 1, 0, 1])
        tree = grow_classification_tree(X, y, 2, max_depth=4, min_samples_leaf=1)
        assert tree.n_nodes == 1  # impure but no valid threshold exists


class TestRegressionGrower:
    def test_single_leaf_closed_form(self):
        # 4 samples at p=0.5 with y=(1,1,1,0): G=-1, H=1, lam=1 -> weight 0.5
        g = np.array([-0.5, -0.5, -0.5, 0.5])
        h = np.full(4, 0.25)
        X = np.arange(4.0)[:, None]
        tree = grow_regression_tree(X, g, h, max_depth=0, reg_lambda=1.0)
        assert tree.n_nodes == 1
        assert abs(tree.value[0, 0] - 0.5) <= 1e-12

    def test_split_requires_positive_gain(self):
        # identical gradients: any split has zero gain and is refused
        X = np.arange(8.0)[:, None]
        g = np.full(8, -0.25)
        h = np.full(8, 0.25)
        tree = grow_regression_tree(X, g, h, max_depth=3, reg_lambda=1.0,
                                    min_child_hessian=0.0)
        assert tree.n_nodes == 1

    def test_gain_formula_on_known_split(self):
        # two clusters with opposite gradients: split in the middle wins
        X = np.array([0.0, 1.0, 10.0, 11.0])[:, None]
        g = np.array([-1.0, -1.0, 1.0, 1.0])
        h = np.ones(4)
        tree = grow_regression_tree(X, g, h, max_depth=1, reg_lambda=1.0,
                                    min_child_hessian=0.0)
        assert tree.feature[0] == 0
        assert tree.threshold[0] == 5.5
        left = tree.value[int(tree.left[0]), 0]
        right = tree.value[int(tree.right[0]), 0]
        # leaf weight -G/(H+lam) = 2/3 on each side
        assert abs(left - 2.0 / 3.0) <= 1e-12
        assert abs(right + 2.0 / 3.0) <= 1e-12

    def test_min_child_hessian_blocks_thin_children(self):
        X = np.arange(4.0)[:, None]
        g = np.array([-1.0, -1.0, 1.0, 1.0])
        h = np.full(4, 0.25)  # total hessian 1.0
        tree = grow_regression_tree(X, g, h, max_depth=3, reg_lambda=1.0,
                                    min_child_hessian=1.0)
        assert tree.n_nodes == 1

    def test_shared_presort_gives_same_tree(self, rng):
        X = rng.normal(size=(60, 3))
        g = rng.normal(size=60)
        h = np.abs(rng.normal(size=60)) + 0.1
        pre = presort_columns(X)
        t1 = grow_regression_tree(X, g, h, max_depth=4, presort=pre,
                                  min_child_hessian=0.0)
        t2 = grow_regression_tree(X, g, h, max_depth=4, min_child_hessian=0.0)
        assert np.array_equal(t1.feature, t2.feature)
        assert np.array_equal(t1.value, t2.value)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_tree_routes_all_training_rows_to_own_leaf_distribution(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 40))
    X = rng.normal(size=(n, 2))
    y = rng.integers(0, 3, n)
    tree = grow_classification_tree(X, y, 3, max_depth=30, min_samples_leaf=1)
    # fully grown: every leaf is pure unless duplicate feature rows disagree
    leaves = tree.apply(X)
    values = tree.value[leaves]
    assert np.allclose(values.sum(axis=1), 1.0, atol=1e-9)
