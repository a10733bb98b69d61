import numpy as np
import pytest

from speechlab import (
    BaggedTrees,
    BoostedTrees,
    DecisionTree,
    LinearDiscriminant,
    LinearSVM,
    RUSBoostedTrees,
    WeightedKNN,
    load_model,
    predict_sample,
    save_model,
    train_model,
)
from speechlab.exceptions import ModelFormatError, ModelVersionError

from oracles import knn_scan
from test_tree import xor_dataset


def gaussian_pair(n_per_class, d=14, separation=3.0, seed=7):
    rng = np.random.default_rng(seed)
    center = np.zeros(d)
    center[0] = separation
    X = np.vstack([
        rng.standard_normal((n_per_class, d)) - center,
        rng.standard_normal((n_per_class, d)) + center,
    ])
    y = np.repeat([0, 1], n_per_class)
    return X, y


def circles(n, seed, r_inner=1.0, r_outer=2.0, noise=0.1):
    rng = np.random.default_rng(seed)
    half = n // 2
    y = np.repeat([0, 1], half)
    r = np.where(y == 0, r_inner, r_outer) + noise * rng.standard_normal(2 * half)
    theta = rng.uniform(0, 2 * np.pi, 2 * half)
    X = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return X, y


class TestLinearDiscriminant:
    def test_separated_gaussians(self):
        X, y = gaussian_pair(100, seed=7)
        model = LinearDiscriminant().fit(X, y)
        assert np.mean(model.predict(X) == y) >= 0.99

    def test_identical_distributions_hit_majority_prior(self):
        rng = np.random.default_rng(17)
        X = rng.standard_normal((300, 14))
        y = np.array([0] * 180 + [1] * 120)  # prior 0.6
        model = LinearDiscriminant().fit(X, y)
        acc = np.mean(model.predict(X) == y)
        assert abs(acc - 0.6) <= 0.1

    def test_feature_permutation_symmetry(self):
        X, y = gaussian_pair(100, seed=7)
        X_test, _ = gaussian_pair(30, seed=8)
        base = LinearDiscriminant().fit(X, y).predict(X_test)

        perm_train, perm_test = X.copy(), X_test.copy()
        perm_train[:, [2, 9]] = perm_train[:, [9, 2]]
        perm_test[:, [2, 9]] = perm_test[:, [9, 2]]
        permuted = LinearDiscriminant().fit(perm_train, y).predict(perm_test)
        np.testing.assert_array_equal(base, permuted)

    def test_mean_point_scores_high(self):
        X, y = gaussian_pair(100, seed=7)
        model = LinearDiscriminant().fit(X, y)
        mean_of_class_1 = X[y == 1].mean(axis=0)
        scores = model.predict_proba(mean_of_class_1.reshape(1, -1))[0]
        assert scores[1] > 0.99

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            LinearDiscriminant().fit(np.random.default_rng(0).standard_normal((10, 3)), np.zeros(10, dtype=int))


def separable_pair(n, d=5, margin=0.5, seed=0):
    """Uniform cloud labeled by the sign of x0, with a guaranteed margin."""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-3, 3, (4 * n, d))
    keep = np.abs(X[:, 0]) >= margin
    X = X[keep][:n]
    y = (X[:, 0] > 0).astype(np.int64)
    return X, y


class TestLinearSVM:
    def test_separable_data(self):
        X, y = separable_pair(300, seed=7)
        X_test, y_test = separable_pair(200, seed=8)
        model = LinearSVM(random_state=7).fit(X, y)
        assert np.mean(model.predict(X_test) == y_test) >= 0.98

    def test_same_seed_identical_weights(self):
        X, y = gaussian_pair(60, d=4, seed=3)
        a = LinearSVM(random_state=11).fit(X, y)
        b = LinearSVM(random_state=11).fit(X, y)
        np.testing.assert_array_equal(a.coef_, b.coef_)
        np.testing.assert_array_equal(a.intercept_, b.intercept_)

    def test_label_flip_swaps_predictions(self):
        X, y = gaussian_pair(40, d=3, separation=1.0, seed=5)
        X_test, _ = gaussian_pair(25, d=3, separation=1.0, seed=6)
        forward = LinearSVM(random_state=2).fit(X, y).predict(X_test)
        flipped = LinearSVM(random_state=2).fit(X, 1 - y).predict(X_test)
        np.testing.assert_array_equal(forward, 1 - flipped)

    def test_multiclass_one_vs_rest(self):
        rng = np.random.default_rng(9)
        centers = np.array([[0, 0], [6, 0], [0, 6]])
        X = np.vstack([rng.standard_normal((50, 2)) + c for c in centers])
        y = np.repeat([0, 1, 2], 50)
        model = LinearSVM(random_state=1).fit(X, y)
        assert np.mean(model.predict(X) == y) >= 0.95


class TestWeightedKNN:
    def test_training_point_wins(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((30, 4))
        y = rng.integers(0, 3, 30)
        model = WeightedKNN(k=5).fit(X, y)
        assert model.predict(X[12].reshape(1, -1))[0] == y[12]

    def test_one_nn_two_points(self):
        X = np.array([[0.0], [10.0]])
        y = np.array([1, 0])
        model = WeightedKNN(k=1).fit(X, y)
        assert model.predict([[2.0]])[0] == 1
        assert model.predict([[9.0]])[0] == 0

    def test_matches_exhaustive_scan_oracle(self):
        rng = np.random.default_rng(42)
        X = rng.standard_normal((500, 6)) * rng.uniform(0.5, 2.0, 6)
        y = rng.integers(0, 4, 500)
        model = WeightedKNN(k=10).fit(X, y)

        mean, std = X.mean(axis=0), X.std(axis=0)
        queries = rng.standard_normal((60, 6))
        got = model.predict(queries)
        got_scores = model.predict_proba(queries)
        for q, label, scores in zip(queries, got, got_scores):
            want = knn_scan((X - mean) / std, y, (q - mean) / std, k=10, n_classes=4)
            assert label == int(np.argmax(want))
            np.testing.assert_allclose(scores, want, rtol=1e-9)

    def test_k_larger_than_n_rejected(self):
        with pytest.raises(ValueError):
            WeightedKNN(k=10).fit(np.zeros((5, 2)), np.array([0, 1, 0, 1, 0]))


class TestBaggedTrees:
    def test_single_tree_reduction(self):
        X, y = xor_dataset(80, seed=5)
        bagged = BaggedTrees(n_trees=1, bootstrap=False, random_state=0).fit(X, y)
        single = DecisionTree().fit(X, y)
        grid = np.random.default_rng(0).uniform(-0.5, 1.5, (200, 2))
        np.testing.assert_array_equal(bagged.predict(grid), single.predict(grid))
        np.testing.assert_array_equal(bagged.predict_proba(grid), single.predict_proba(grid))

    def test_xor_holdout(self):
        X, y = xor_dataset(200, seed=6)
        X_test, y_test = xor_dataset(100, seed=66)
        model = BaggedTrees(n_trees=30, random_state=7).fit(X, y)
        assert np.mean(model.predict(X_test) == y_test) >= 0.95

    def test_same_seed_identical_forest(self):
        X, y = xor_dataset(100, seed=8)
        a = BaggedTrees(n_trees=10, random_state=3).fit(X, y)
        b = BaggedTrees(n_trees=10, random_state=3).fit(X, y)
        for ta, tb in zip(a.trees_, b.trees_):
            assert ta.root_.to_dict() == tb.root_.to_dict()


class TestBoostedTrees:
    def test_hand_traced_first_round(self):
        # six 1-D points; the duplicated x=5 pair (one per class) forces the
        # tree into a tied leaf that predicts class 0, so exactly one point
        # is missed with weight 1/6
        X = np.array([[1.0], [2.0], [3.0], [4.0], [5.0], [5.0]])
        y = np.array([0, 0, 0, 1, 1, 0])
        model = BoostedTrees(n_rounds=1).fit(X, y)

        eps = 1.0 / 6.0
        assert model.errors_[0] == pytest.approx(eps, abs=1e-15)
        expected_alpha = np.log((1 - eps) / eps) + np.log(2 - 1)
        assert model.alphas_[0] == pytest.approx(expected_alpha, abs=1e-12)

        raw = np.full(6, 1.0 / 6.0)
        raw[4] *= np.exp(expected_alpha)
        expected_weights = raw / raw.sum()
        np.testing.assert_allclose(model.sample_weights_, expected_weights, atol=1e-12)
        np.testing.assert_allclose(
            model.sample_weights_, [0.1, 0.1, 0.1, 0.1, 0.5, 0.1], atol=1e-12
        )

    def test_perfect_tree_stops_boosting(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 0, 1, 1])
        model = BoostedTrees(n_rounds=30).fit(X, y)
        assert len(model.trees_) == 1
        assert model.alphas_ == [1.0]
        np.testing.assert_array_equal(model.predict(X), model.trees_[0].predict(X))

    def test_concentric_circles_beat_linear_model(self):
        X, y = circles(300, seed=12)
        X_test, y_test = circles(200, seed=13)
        boosted = BoostedTrees(n_rounds=30, random_state=1).fit(X, y)
        linear = LinearSVM(random_state=1).fit(X, y)
        boosted_acc = np.mean(boosted.predict(X_test) == y_test)
        linear_acc = np.mean(linear.predict(X_test) == y_test)
        assert boosted_acc >= 0.9
        assert linear_acc <= 0.7

    def test_unlearnable_data_raises_training_error(self):
        from speechlab.exceptions import TrainingError

        # identical features with a 50/50 label split: the tree cannot split,
        # every round sits exactly at chance, and the resets run out
        X = np.zeros((10, 2))
        y = np.array([0, 1] * 5)
        with pytest.raises(TrainingError):
            BoostedTrees(n_rounds=5).fit(X, y)

    def test_multiclass_alpha_uses_k_minus_one(self):
        rng = np.random.default_rng(14)
        X = np.vstack([rng.standard_normal((40, 2)) + [0, 0],
                       rng.standard_normal((40, 2)) + [4, 0],
                       rng.standard_normal((40, 2)) + [0, 4]])
        y = np.repeat([0, 1, 2], 40)
        model = BoostedTrees(n_rounds=5, random_state=0).fit(X, y)
        for eps, alpha in zip(model.errors_, model.alphas_):
            if eps > 0:
                assert alpha == pytest.approx(np.log((1 - eps) / eps) + np.log(2.0))


class TestRUSBoost:
    def test_balanced_data_keeps_exact_counts(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((90, 3))
        y = np.repeat([0, 1, 2], 30)
        model = RUSBoostedTrees(n_rounds=5, random_state=2).fit(X, y)
        for counts in model.round_class_counts_:
            assert counts == [30, 30, 30]

    def test_undersampled_rounds_hit_minority_count(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((120, 3))
        y = np.array([0] * 100 + [1] * 20)
        X[y == 1] += 1.0
        model = RUSBoostedTrees(n_rounds=5, random_state=2).fit(X, y)
        for counts in model.round_class_counts_:
            assert counts == [20, 20]

    def test_minority_recall_beats_plain_boosting(self):
        rng = np.random.default_rng(20)
        n_major, n_minor = 950, 50
        X = np.vstack([
            rng.standard_normal((n_major, 2)),
            rng.standard_normal((n_minor, 2)) + 1.5,
        ])
        y = np.repeat([0, 1], [n_major, n_minor])
        X_test = np.vstack([
            rng.standard_normal((500, 2)),
            rng.standard_normal((100, 2)) + 1.5,
        ])
        y_test = np.repeat([0, 1], [500, 100])

        plain = BoostedTrees(n_rounds=30, random_state=6).fit(X, y)
        rus = RUSBoostedTrees(n_rounds=30, random_state=6).fit(X, y)
        recall = lambda m: np.mean(m.predict(X_test[y_test == 1]) == 1)
        assert recall(rus) > recall(plain)

    def test_same_seed_identical(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((60, 3))
        y = np.array([0] * 40 + [1] * 20)
        a = RUSBoostedTrees(n_rounds=5, random_state=9).fit(X, y)
        b = RUSBoostedTrees(n_rounds=5, random_state=9).fit(X, y)
        assert a.alphas_ == b.alphas_
        for ta, tb in zip(a.trees_, b.trees_):
            assert ta.root_.to_dict() == tb.root_.to_dict()


class TestTreeFamilyScaleInvariance:
    @pytest.mark.parametrize("family", ["bagged", "boosted", "rusboost"])
    def test_column_scaling_leaves_predictions_unchanged(self, family):
        rng = np.random.default_rng(44)
        X = rng.standard_normal((120, 5))
        y = (X[:, 1] + 0.5 * X[:, 3] > 0).astype(np.int64)
        X_test = rng.standard_normal((60, 5))

        base = train_model(family, X, y, ["n", "p"], seed=3).predict(X_test)
        Xs, Xs_test = X.copy(), X_test.copy()
        Xs[:, 3] *= 4.0
        Xs_test[:, 3] *= 4.0
        scaled = train_model(family, Xs, y, ["n", "p"], seed=3).predict(Xs_test)
        np.testing.assert_array_equal(base, scaled)


def fitted_models():
    X, y = gaussian_pair(40, d=14, separation=1.0, seed=10)
    names = ["neg", "pos"]
    return [
        train_model(family, X, y, names, seed=5)
        for family in ("lda", "svm", "knn", "boosted", "bagged", "rusboost")
    ]


class TestPredictionContract:
    def test_scores_sum_to_one_and_argmax(self):
        rng = np.random.default_rng(30)
        for model in fitted_models():
            for _ in range(20):
                p = predict_sample(model, rng.standard_normal(14) * 5)
                assert p.scores.sum() == pytest.approx(1.0, abs=1e-9)
                assert p.label == int(np.argmax(p.scores))
                assert np.all(np.isfinite(p.scores))

    def test_knn_training_row_hit(self):
        X, y = gaussian_pair(20, d=14, seed=11)
        model = train_model("knn", X, y, ["a", "b"], k=3)
        p = predict_sample(model, X[5])
        assert p.label == y[5]

    def test_nan_rejected(self):
        model = fitted_models()[0]
        bad = np.zeros(14)
        bad[2] = np.nan
        with pytest.raises(ValueError):
            predict_sample(model, bad)

    def test_wrong_length_rejected(self):
        model = fitted_models()[0]
        with pytest.raises(ValueError):
            predict_sample(model, np.zeros(9))


class TestModelSerialization:
    def test_round_trip_behavioral_equivalence(self, tmp_path):
        rng = np.random.default_rng(50)
        probes = rng.standard_normal((1000, 14)) * 3
        for model in fitted_models():
            path = tmp_path / "m.json"
            save_model(model, path)
            loaded = load_model(path)
            np.testing.assert_array_equal(model.predict(probes), loaded.predict(probes))
            np.testing.assert_array_equal(
                model.predict_proba(probes), loaded.predict_proba(probes)
            )
            assert loaded.class_names_ == model.class_names_
            assert loaded.training_seed_ == model.training_seed_

    def test_truncated_file_is_parse_error(self, tmp_path):
        model = fitted_models()[0]
        path = tmp_path / "m.json"
        save_model(model, path)
        path.write_bytes(path.read_bytes()[: path.stat().st_size // 2])
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_newer_version_is_incompatibility_error(self, tmp_path):
        import json

        model = fitted_models()[0]
        path = tmp_path / "m.json"
        save_model(model, path)
        payload = json.loads(path.read_text())
        payload["version"] = 999
        path.write_text(json.dumps(payload))
        with pytest.raises(ModelVersionError):
            load_model(path)

    def test_wrong_format_field(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"format": "something-else", "version": 1}')
        with pytest.raises(ModelFormatError):
            load_model(path)
