import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harbench.dataset import LabeledDataset
from harbench.errors import (
    ChecksumError,
    ConfigError,
    DimensionMismatchError,
    DivergenceError,
    EmptyInputError,
    SchemaError,
    VersionError,
)
from harbench.learners import (
    MODEL_KINDS,
    ModelSpec,
    load_model,
    predict,
    predict_scores,
    save_model,
    softmax,
    train,
)
from harbench.learners._grower import Tree
from harbench.learners.logistic import LogisticRegressionModel
from harbench.learners.random_forest import RandomForestModel
from harbench.synth import SyntheticSpec, generate

import oracles

from conftest import random_dataset


def _tiny_spec(kind, seed=0, **extra):
    """Small hyperparameters so the suite stays fast."""
    params = {}
    if kind == "random_forest":
        params = {"n_trees": 10, "max_depth": 6}
    elif kind == "gradient_boost":
        params = {"n_rounds": 10, "max_depth": 3}
    elif kind == "logistic_regression":
        params = {"epochs": 200}
    params.update(extra)
    return ModelSpec(kind, params=params, seed=seed)


@pytest.fixture(scope="module")
def cluster_ds():
    return generate(SyntheticSpec(4, 5, 60, 8.0, 1.0, seed=77))


class TestTrainContracts:
    def test_empty_dataset_rejected(self):
        ds = LabeledDataset(["a"], np.empty((0, 1)), np.empty(0, int), np.empty(0, int))
        for kind in MODEL_KINDS:
            with pytest.raises(EmptyInputError):
                train(_tiny_spec(kind), ds)

    def test_single_class_degenerates_to_constant(self):
        ds = LabeledDataset(["a"], np.arange(6.0)[:, None], np.full(6, 5), np.ones(6, int))
        for kind in ("decision_tree", "random_forest", "naive_bayes"):
            model = train(_tiny_spec(kind), ds)
            assert model.predict(np.array([123.0])) == 5
            assert model.predict_scores(np.array([123.0])).tolist() == [1.0]

    def test_single_class_rejected_for_softmax_models(self):
        ds = LabeledDataset(["a"], np.arange(6.0)[:, None], np.full(6, 5), np.ones(6, int))
        for kind in ("logistic_regression", "gradient_boost"):
            with pytest.raises(SchemaError):
                train(_tiny_spec(kind), ds)

    def test_non_finite_features_rejected(self):
        matrix = np.array([[1.0], [np.nan]])
        with pytest.raises(SchemaError):
            # the dataset itself would refuse NaN; hit the trainer directly
            LabeledDataset(["a"], matrix, [1, 2], [1, 1])

    def test_decision_tree_single_class_is_leaf(self):
        ds = LabeledDataset(["a"], np.arange(4.0)[:, None], np.full(4, 3), np.ones(4, int))
        model = train(ModelSpec("decision_tree"), ds)
        assert model.tree.n_nodes == 1

    def test_unknown_kind_and_params_rejected(self):
        with pytest.raises(ConfigError):
            ModelSpec("svm")
        with pytest.raises(ConfigError):
            ModelSpec("decision_tree", params={"bogus": 1})
        with pytest.raises(ConfigError):
            ModelSpec("gradient_boost", params={"learning_rate": -0.1})


class TestPredictContracts:
    def test_scores_sum_to_one_for_all_kinds(self, cluster_ds, rng):
        probes = rng.normal(size=(50, cluster_ds.n_channels)) * 5
        for kind in MODEL_KINDS:
            model = train(_tiny_spec(kind), cluster_ds)
            scores = model.predict_scores(probes)
            assert np.abs(scores.sum(axis=1) - 1.0).max() <= 1e-9, kind

    def test_argmax_consistency_with_low_code_ties(self, cluster_ds, rng):
        probes = rng.normal(size=(30, cluster_ds.n_channels)) * 5
        for kind in MODEL_KINDS:
            model = train(_tiny_spec(kind), cluster_ds)
            scores = model.predict_scores(probes)
            expected = model.class_codes[np.argmax(scores, axis=1)]
            assert np.array_equal(model.predict(probes), expected), kind

    def test_dimension_mismatch_rejected(self, cluster_ds):
        model = train(_tiny_spec("decision_tree"), cluster_ds)
        with pytest.raises(DimensionMismatchError):
            model.predict(np.zeros(cluster_ds.n_channels + 1))

    def test_single_vector_and_free_functions(self, cluster_ds):
        model = train(_tiny_spec("naive_bayes"), cluster_ds)
        x = cluster_ds.matrix[0]
        assert predict(model, x) == model.predict(x)
        assert np.array_equal(predict_scores(model, x), model.predict_scores(x))
        assert isinstance(predict(model, x), int)

    def test_unpruned_tree_memorizes_training_rows(self, rng):
        ds = random_dataset(rng, 50, 3, n_classes=4)
        spec = ModelSpec("decision_tree", params={"max_depth": 64, "min_samples_leaf": 1})
        model = train(spec, ds)
        assert np.array_equal(model.predict(ds.matrix), ds.labels)

    def test_unpruned_forest_without_bootstrap_memorizes(self, rng):
        ds = random_dataset(rng, 40, 3, n_classes=3)
        spec = ModelSpec("random_forest", params={
            "n_trees": 3, "bootstrap": False, "max_features": None,
            "max_depth": 64, "min_samples_leaf": 1})
        model = train(spec, ds)
        assert np.array_equal(model.predict(ds.matrix), ds.labels)

    def test_degenerate_forest_equals_plain_tree(self, cluster_ds, rng):
        tree = train(ModelSpec("decision_tree", seed=5), cluster_ds)
        forest = train(ModelSpec("random_forest", params={
            "n_trees": 1, "bootstrap": False, "max_features": None}, seed=5),
            cluster_ds)
        probes = rng.normal(size=(60, cluster_ds.n_channels)) * 5
        assert np.array_equal(tree.predict(probes), forest.predict(probes))
        assert np.array_equal(tree.predict_scores(probes), forest.predict_scores(probes))


class TestDeterminism:
    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_same_seed_bit_identical_scores(self, kind, cluster_ds, rng):
        probes = rng.normal(size=(20, cluster_ds.n_channels)) * 5
        s1 = train(_tiny_spec(kind, seed=11), cluster_ds).predict_scores(probes)
        s2 = train(_tiny_spec(kind, seed=11), cluster_ds).predict_scores(probes)
        assert np.array_equal(s1, s2)

    def test_forest_seed_changes_trees(self, cluster_ds):
        m1 = train(_tiny_spec("random_forest", seed=1), cluster_ds)
        m2 = train(_tiny_spec("random_forest", seed=2), cluster_ds)
        assert not np.array_equal(m1.predict_scores(cluster_ds.matrix),
                                  m2.predict_scores(cluster_ds.matrix))

    def test_growing_forest_keeps_earlier_trees(self, cluster_ds):
        small = train(_tiny_spec("random_forest", seed=4, n_trees=3), cluster_ds)
        big = train(_tiny_spec("random_forest", seed=4, n_trees=6), cluster_ds)
        for a, b in zip(small.trees, big.trees[:3]):
            assert np.array_equal(a.feature, b.feature)
            assert np.array_equal(a.value, b.value)

    def test_worker_threads_do_not_change_results(self, cluster_ds):
        for kind in ("random_forest", "gradient_boost"):
            seq = train(_tiny_spec(kind, seed=3, n_jobs=1), cluster_ds)
            par = train(_tiny_spec(kind, seed=3, n_jobs=2), cluster_ds)
            assert np.array_equal(seq.predict_scores(cluster_ds.matrix),
                                  par.predict_scores(cluster_ds.matrix))

    def test_permutation_invariance_nb_and_logistic(self, rng):
        ds = random_dataset(rng, 60, 3, n_classes=3)
        perm = rng.permutation(60)
        shuffled = ds.take(perm)
        nb1 = train(_tiny_spec("naive_bayes"), ds)
        nb2 = train(_tiny_spec("naive_bayes"), shuffled)
        assert np.array_equal(nb1.means, nb2.means)
        assert np.array_equal(nb1.variances, nb2.variances)
        lr1 = train(_tiny_spec("logistic_regression", epochs=50), ds)
        lr2 = train(_tiny_spec("logistic_regression", epochs=50), shuffled)
        assert np.allclose(lr1.weights, lr2.weights, atol=1e-12)


class TestNaiveBayes:
    def test_closed_form_two_gaussians(self):
        # class 1 samples {-2, 0}: mean -1, var 1; class 2 {0, 2}: mean 1, var 1.
        # Equal priors and variances put the decision boundary at x = 0.
        ds = LabeledDataset(["x"], np.array([[-2.0], [0.0], [0.0], [2.0]]),
                            [1, 1, 2, 2], [1, 1, 1, 1])
        model = train(ModelSpec("naive_bayes"), ds)
        assert model.predict(np.array([0.2])) == 2
        assert model.predict(np.array([-0.2])) == 1
        # independent check: nearest-mean rule (shared variance, equal priors)
        for x in (-1.5, -0.3, 0.4, 2.2):
            nearest = 1 if abs(x - (-1.0)) < abs(x - 1.0) else 2
            assert model.predict(np.array([x])) == nearest

    def test_constant_feature_survives_variance_floor(self):
        matrix = np.column_stack([np.ones(8), np.arange(8.0)])
        labels = [1] * 4 + [2] * 4
        ds = LabeledDataset(["const", "x"], matrix, labels, np.ones(8, int))
        model = train(ModelSpec("naive_bayes"), ds)
        scores = model.predict_scores(np.array([1.0, 6.0]))
        assert np.isfinite(scores).all()
        assert model.predict(np.array([1.0, 6.0])) == 2


class TestLogisticRegression:
    def test_separable_1d_reaches_perfect_training_accuracy(self):
        x = np.array([-2.0, -1.0, 1.0, 2.0])
        ds = LabeledDataset(["x"], x[:, None], [1, 1, 2, 2], np.ones(4, int))
        assert oracles.threshold_classifier_exists(x, np.array([0, 0, 1, 1]))
        model = train(ModelSpec("logistic_regression", params={"epochs": 500}), ds)
        assert np.array_equal(model.predict(x[:, None]), [1, 1, 2, 2])

    def test_zero_weights_predict_lowest_code(self):
        spec = ModelSpec("logistic_regression")
        model = LogisticRegressionModel(spec, [3, 7, 9], 2, np.zeros((3, 3)))
        assert model.predict(np.array([4.0, -1.0])) == 3
        assert np.allclose(model.predict_scores(np.array([4.0, -1.0])), 1 / 3)

    def test_huge_l2_drives_weights_toward_zero(self, cluster_ds):
        # lr * l2 must stay < 2 for plain gradient descent stability
        def fit(l2):
            spec = ModelSpec("logistic_regression",
                             params={"l2": l2, "learning_rate": 1e-3, "epochs": 400})
            return train(spec, cluster_ds)

        small = fit(1e-4)
        big = fit(1e3)
        assert np.abs(big.weights[:, 1:]).max() < 1e-2
        assert np.abs(big.weights[:, 1:]).max() < 0.1 * np.abs(small.weights[:, 1:]).max()
        scores = big.predict_scores(cluster_ds.matrix[:5])
        assert np.abs(scores - 1.0 / big.n_classes).max() < 0.05

    def test_gradient_matches_finite_differences(self, rng):
        from harbench.learners import loss_and_grad
        for _ in range(5):
            n, d, k = int(rng.integers(5, 30)), int(rng.integers(1, 5)), int(rng.integers(2, 4))
            Xb = np.hstack([np.ones((n, 1)), rng.normal(size=(n, d))])
            y = rng.integers(0, k, n)
            W = rng.normal(size=(k, d + 1)) * 0.3
            _, grad = loss_and_grad(W, Xb, y, 1e-3)
            num = oracles.finite_difference_grad(W, Xb, y, 1e-3)
            rel = np.abs(grad - num) / np.maximum(np.abs(num), 1e-8)
            assert rel.max() <= 1e-5

    def test_divergent_learning_rate_reports_epoch(self, cluster_ds):
        spec = ModelSpec("logistic_regression",
                         params={"learning_rate": 1e12, "epochs": 50,
                                 "standardize": False})
        with pytest.raises(DivergenceError, match="epoch"):
            train(spec, cluster_ds)

    def test_standardization_stored_and_replayed(self, cluster_ds):
        model = train(_tiny_spec("logistic_regression"), cluster_ds)
        assert model.scaler is not None
        raw_spec = ModelSpec("logistic_regression",
                             params={"epochs": 200, "standardize": False})
        raw_model = train(raw_spec, cluster_ds)
        assert raw_model.scaler is None


class TestGradientBoost:
    def test_zero_rounds_uniform(self, cluster_ds):
        model = train(ModelSpec("gradient_boost", params={"n_rounds": 0}), cluster_ds)
        scores = model.predict_scores(cluster_ds.matrix[:3])
        assert np.allclose(scores, 1.0 / model.n_classes)

    def test_zero_learning_rate_keeps_base_distribution(self, cluster_ds):
        model = train(ModelSpec("gradient_boost",
                                params={"n_rounds": 3, "learning_rate": 0.0}), cluster_ds)
        scores = model.predict_scores(cluster_ds.matrix[:3])
        assert np.allclose(scores, 1.0 / model.n_classes)

    def test_binary_single_round_single_leaf_score(self):
        # y=(1,1,1,0) at base p=0.5: G=-1, H=1, lam=1 -> leaf 0.5,
        # so the positive-class score is sigmoid(lr * 0.5).
        X = np.arange(4.0)[:, None]
        ds = LabeledDataset(["x"], X, [2, 2, 2, 1], np.ones(4, int))
        model = train(ModelSpec("gradient_boost",
                                params={"n_rounds": 1, "max_depth": 0,
                                        "learning_rate": 0.3}), ds)
        leaf = model.trees[0][0].value[0, 0]
        assert abs(leaf - 0.5) <= 1e-12
        s = model.predict_scores(np.array([0.0]))
        assert abs(s[1] - 1.0 / (1.0 + math.exp(-0.15))) <= 1e-12

    def test_multiclass_loss_non_increasing(self, cluster_ds):
        model = train(ModelSpec("gradient_boost", params={"n_rounds": 25}), cluster_ds)
        assert len(model.loss_history) == 26
        assert (np.diff(model.loss_history) <= 1e-12).all()

    def test_binary_loss_non_increasing(self, rng):
        ds = random_dataset(rng, 120, 3, n_classes=2)
        model = train(ModelSpec("gradient_boost", params={"n_rounds": 20}), ds)
        assert (np.diff(model.loss_history) <= 1e-12).all()


class TestForestVoting:
    def test_soft_vote_three_to_one(self):
        def leaf_tree(dist):
            return Tree(feature=np.array([-1], np.int32),
                        threshold=np.array([np.nan]),
                        left=np.array([-1], np.int32),
                        right=np.array([-1], np.int32),
                        value=np.array([dist]))

        spec = ModelSpec("random_forest", params={"n_trees": 4})
        trees = [leaf_tree([1.0, 0.0])] * 3 + [leaf_tree([0.0, 1.0])]
        model = RandomForestModel(spec, [1, 2], 1, trees)
        assert np.allclose(model.predict_scores(np.array([0.0])), [0.75, 0.25])
        assert model.predict(np.array([0.0])) == 1

    def test_softmax_of_zero_logits_uniform(self):
        assert np.allclose(softmax(np.zeros((1, 3))), 1 / 3)


class TestModelRoundTrip:
    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_save_load_prediction_identity(self, kind, cluster_ds, tmp_path, rng):
        model = train(_tiny_spec(kind, seed=21), cluster_ds)
        path = tmp_path / f"{kind}.model"
        save_model(model, path)
        back = load_model(path)
        probes = rng.normal(size=(40, cluster_ds.n_channels)) * 4
        assert np.array_equal(model.predict(probes), back.predict(probes))
        assert np.array_equal(model.predict_scores(probes), back.predict_scores(probes))
        assert back.spec == model.spec

    def test_corrupt_model_file_reported(self, cluster_ds, tmp_path):
        model = train(_tiny_spec("decision_tree"), cluster_ds)
        path = tmp_path / "m.model"
        save_model(model, path)
        data = bytearray(path.read_bytes())
        data[len(data) // 2] ^= 0x55
        path.write_bytes(bytes(data))
        with pytest.raises(ChecksumError):
            load_model(path)

    def test_version_mismatch_reported(self, tmp_path):
        from harbench.container import write_container
        from harbench.learners.io import MODEL_MAGIC
        path = tmp_path / "m.model"
        write_container(path, MODEL_MAGIC, {"kind": "decision_tree"}, {}, version=77)
        with pytest.raises(VersionError):
            load_model(path)


class TestNonlinearOrdering:
    def test_tree_models_beat_linear_model_on_interleaved_bands(self, rng):
        # Interleaved bands on one channel: thresholds separate the classes
        # perfectly but no linear boundary does, so the tree-based models
        # should dominate logistic regression by a wide margin (the shape
        # the full-corpus comparison expects).
        n = 2000
        x0 = rng.uniform(0.0, 4.0, size=n)
        y = 1 + (np.floor(x0).astype(int) % 2)
        noise = rng.normal(size=(n, 4))
        X = np.column_stack([x0, noise])
        ds = LabeledDataset([f"f{i}" for i in range(5)], X, y,
                            np.ones(n, dtype=int))
        from harbench.preprocess import SplitSpec, holdout_split
        from harbench.metrics import evaluate
        train_ds, test_ds = holdout_split(ds, SplitSpec(0.7, "stratified_random", 8))

        acc = {}
        for kind in ("decision_tree", "random_forest", "gradient_boost",
                     "logistic_regression"):
            params = {"n_trees": 30} if kind == "random_forest" else \
                     {"n_rounds": 30, "max_depth": 4} if kind == "gradient_boost" else {}
            model = train(ModelSpec(kind, params=params, seed=8), train_ds)
            acc[kind] = evaluate(model, test_ds).accuracy

        assert acc["logistic_regression"] < 0.65  # near chance on bands
        for kind in ("decision_tree", "random_forest", "gradient_boost"):
            assert acc[kind] >= 0.95
            assert acc[kind] - acc["logistic_regression"] >= 0.15


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 99999))
def test_scores_normalized_property(seed):
    rng = np.random.default_rng(seed)
    ds = random_dataset(rng, 40, 3, n_classes=3)
    kind = MODEL_KINDS[seed % len(MODEL_KINDS)]
    model = train(_tiny_spec(kind, seed=seed, **(
        {"n_trees": 3} if kind == "random_forest" else
        {"n_rounds": 3} if kind == "gradient_boost" else
        {"epochs": 30} if kind == "logistic_regression" else {})), ds)
    probes = rng.normal(size=(10, 3)) * 3
    scores = model.predict_scores(probes)
    assert np.abs(scores.sum(axis=1) - 1.0).max() <= 1e-9
    assert (scores >= 0).all()
