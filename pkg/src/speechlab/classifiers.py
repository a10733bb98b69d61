"""The six classifier families with a uniform sklearn-style contract.

Every estimator implements fit(X, y) / predict(X) / predict_proba(X) with
integer class indices, is a deterministic function of (data,
hyperparameters, seed), and returns probability rows that sum to one.
Distance- and margin-based families (LDA, SVM, KNN) standardize features
internally; the tree families are scale-invariant and train on raw values.

Fitted models round-trip through a versioned JSON file format (see
docs/model_format.md).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .exceptions import ModelFormatError, ModelVersionError, TrainingError
from .tree import DecisionTree, TreeNode
from .validation import check_feature_matrix, check_feature_vector, check_training_set

MODEL_FORMAT = "speechlab-model"
MODEL_FORMAT_VERSION = 1

_STANDARDIZE_FLOOR = 1e-12
_KNN_WEIGHT_EPS = 1e-12
_MAX_BOOST_RESETS = 3


@dataclass(frozen=True)
class Prediction:
    """Predicted class index plus normalized per-class scores."""

    label: int
    scores: np.ndarray


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _standardize_fit(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale < _STANDARDIZE_FLOOR, 1.0, scale)
    return mean, scale


def _rng_for(seed, *stream) -> np.random.Generator:
    """Independent deterministic generator for a (seed, index...) stream."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, stream)]))


def derive_seed(seed, index) -> int:
    """Deterministic child seed, e.g. per cross-validation fold."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


class LinearDiscriminant(BaseEstimator, ClassifierMixin):
    """Shared-covariance Gaussian discriminant with a trace-scaled ridge.

    The pooled within-class covariance gets lambda*I added, with
    lambda = ridge_scale * trace(Sigma) / n_features, before inversion.
    """

    def __init__(self, ridge_scale=1e-6):
        self.ridge_scale = ridge_scale

    def fit(self, X, y):
        X, y = check_training_set(X, y)
        n, d = X.shape
        self.n_classes_ = int(y.max() + 1)
        self.n_features_in_ = d

        means = np.zeros((self.n_classes_, d))
        priors = np.zeros(self.n_classes_)
        pooled = np.zeros((d, d))
        for c in range(self.n_classes_):
            rows = X[y == c]
            if len(rows) == 0:
                raise ValueError(f"class {c} has no training rows")
            means[c] = rows.mean(axis=0)
            priors[c] = len(rows) / n
            centered = rows - means[c]
            pooled += centered.T @ centered
        pooled /= n
        ridge = self.ridge_scale * np.trace(pooled) / d
        pooled += ridge * np.eye(d)

        inv_means = np.linalg.solve(pooled, means.T).T  # Sigma^-1 mu_k, per class
        self.coef_ = inv_means
        self.intercept_ = -0.5 * np.einsum("ij,ij->i", means, inv_means) + np.log(priors)
        return self

    def decision_function(self, X):
        X = check_feature_matrix(X, self.n_features_in_)
        return X @ self.coef_.T + self.intercept_

    def predict_proba(self, X):
        return _softmax(self.decision_function(X))

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)


class LinearSVM(BaseEstimator, ClassifierMixin):
    """Linear hinge-loss classifier trained with Pegasos-style SGD.

    One-vs-rest for more than two classes. All one-vs-rest problems reuse
    the same per-epoch visit order so the binary label-flip symmetry holds
    exactly. The bias term is unregularized.
    """

    def __init__(self, epochs=50, reg=1e-4, random_state=0):
        self.epochs = epochs
        self.reg = reg
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_training_set(X, y)
        n, d = X.shape
        if self.epochs < 1 or self.reg <= 0:
            raise ValueError("epochs must be >= 1 and reg > 0")
        self.n_classes_ = int(y.max() + 1)
        self.n_features_in_ = d
        self.mean_, self.scale_ = _standardize_fit(X)
        Xs = (X - self.mean_) / self.scale_

        rng = _rng_for(self.random_state)
        orders = [rng.permutation(n) for _ in range(self.epochs)]

        self.coef_ = np.zeros((self.n_classes_, d))
        self.intercept_ = np.zeros(self.n_classes_)
        lam = self.reg
        for c in range(self.n_classes_):
            target = np.where(y == c, 1.0, -1.0)
            w = np.zeros(d)
            b = 0.0
            t = 0
            for order in orders:
                for i in order:
                    t += 1
                    eta = 1.0 / (lam * t)
                    margin = target[i] * (Xs[i] @ w + b)
                    w *= 1.0 - eta * lam
                    if margin < 1.0:
                        w += eta * target[i] * Xs[i]
                        b += eta * target[i]
            self.coef_[c] = w
            self.intercept_[c] = b
        return self

    def decision_function(self, X):
        X = check_feature_matrix(X, self.n_features_in_)
        Xs = (X - self.mean_) / self.scale_
        return Xs @ self.coef_.T + self.intercept_

    def predict_proba(self, X):
        return _softmax(self.decision_function(X))

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)


class WeightedKNN(BaseEstimator, ClassifierMixin):
    """k-nearest-neighbors with inverse-squared-distance voting.

    Neighbors are ranked by (distance, training index) so ties are
    deterministic; votes are 1 / (d^2 + 1e-12), normalized per class.
    """

    def __init__(self, k=10):
        self.k = k

    def fit(self, X, y):
        X, y = check_training_set(X, y)
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.k > len(y):
            raise ValueError(f"k={self.k} exceeds training size {len(y)}")
        self.n_classes_ = int(y.max() + 1)
        self.n_features_in_ = X.shape[1]
        self.mean_, self.scale_ = _standardize_fit(X)
        self.X_ = (X - self.mean_) / self.scale_
        self.y_ = y
        return self

    def predict_proba(self, X):
        X = check_feature_matrix(X, self.n_features_in_)
        Xs = (X - self.mean_) / self.scale_
        out = np.empty((len(Xs), self.n_classes_))
        for i, q in enumerate(Xs):
            d2 = ((self.X_ - q) ** 2).sum(axis=1)
            nearest = np.argsort(d2, kind="stable")[: self.k]
            weights = 1.0 / (d2[nearest] + _KNN_WEIGHT_EPS)
            votes = np.bincount(self.y_[nearest], weights=weights, minlength=self.n_classes_)
            out[i] = votes / votes.sum()
        return out

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)


class BaggedTrees(BaseEstimator, ClassifierMixin):
    """Bootstrap-aggregated unpruned CART trees.

    Per-tree seeds derive from (random_state, tree index), so a parallel
    fit would equal the sequential one. bootstrap=False is a test hook that
    makes one tree reduce exactly to a plain DecisionTree.
    """

    def __init__(self, n_trees=30, random_state=0, bootstrap=True):
        self.n_trees = n_trees
        self.random_state = random_state
        self.bootstrap = bootstrap

    def fit(self, X, y):
        X, y = check_training_set(X, y)
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        n = len(y)
        self.n_classes_ = int(y.max() + 1)
        self.n_features_in_ = X.shape[1]
        self.trees_ = []
        for i in range(self.n_trees):
            if self.bootstrap:
                idx = _rng_for(self.random_state, i).integers(0, n, size=n)
            else:
                idx = np.arange(n)
            tree = DecisionTree(max_depth=None, min_leaf=1)
            tree.fit(X[idx], y[idx], n_classes=self.n_classes_)
            self.trees_.append(tree)
        return self

    def predict_proba(self, X):
        X = check_feature_matrix(X, self.n_features_in_)
        return np.mean([t.predict_proba(X) for t in self.trees_], axis=0)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)


def _samme_boost(X, y, n_classes, n_rounds, max_depth, round_sampler):
    """Shared SAMME loop; round_sampler(attempt, y) picks the fit subset.

    Returns (trees, alphas, errors, final_weights, per_round_counts).
    Rounds with weighted error >= 1 - 1/K are discarded and the weights
    reset to uniform; _MAX_BOOST_RESETS consecutive resets without a
    successful round means the base learner cannot beat chance and training
    fails. A perfect round (error == 0) is kept with weight 1 and ends
    boosting.
    """
    n = len(y)
    w = np.full(n, 1.0 / n)
    trees, alphas, errors, counts = [], [], [], []
    resets = 0
    attempt = 0
    chance_bound = 1.0 - 1.0 / n_classes

    while len(trees) < n_rounds:
        fit_idx = round_sampler(attempt, y)
        attempt += 1
        counts_this = np.bincount(y[fit_idx], minlength=n_classes)

        tree = DecisionTree(max_depth=max_depth, min_leaf=1)
        tree.fit(X[fit_idx], y[fit_idx], sample_weight=w[fit_idx], n_classes=n_classes)
        pred = tree.predict(X)
        miss = pred != y
        err = float(w[miss].sum())

        if err >= chance_bound:
            resets += 1
            if resets > _MAX_BOOST_RESETS:
                raise TrainingError(
                    f"base tree never beat chance after {_MAX_BOOST_RESETS} weight resets"
                )
            w = np.full(n, 1.0 / n)
            continue

        resets = 0
        counts.append(counts_this)
        errors.append(err)
        trees.append(tree)
        if err <= 0.0:
            alphas.append(1.0)
            break
        alpha = np.log((1.0 - err) / err) + np.log(n_classes - 1.0)
        alphas.append(alpha)
        w = w * np.exp(alpha * miss)
        w = w / w.sum()

    return trees, alphas, errors, w, counts


class _BoostedBase(BaseEstimator, ClassifierMixin):
    def __init__(self, n_rounds=30, max_depth=3, random_state=0):
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.random_state = random_state

    def _sampler(self):
        raise NotImplementedError

    def fit(self, X, y):
        X, y = check_training_set(X, y)
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be >= 1")
        self.n_classes_ = int(y.max() + 1)
        self.n_features_in_ = X.shape[1]
        trees, alphas, errors, w, counts = _samme_boost(
            X, y, self.n_classes_, self.n_rounds, self.max_depth, self._sampler()
        )
        self.trees_ = trees
        self.alphas_ = list(map(float, alphas))
        self.errors_ = errors
        self.sample_weights_ = w
        self.round_class_counts_ = [c.tolist() for c in counts]
        return self

    def decision_function(self, X):
        X = check_feature_matrix(X, self.n_features_in_)
        votes = np.zeros((len(X), self.n_classes_))
        for tree, alpha in zip(self.trees_, self.alphas_):
            pred = tree.predict(X)
            votes[np.arange(len(X)), pred] += alpha
        return votes

    def predict_proba(self, X):
        return _softmax(self.decision_function(X))

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)


class BoostedTrees(_BoostedBase):
    """AdaBoost (SAMME) over depth-limited CART trees."""

    def _sampler(self):
        def every_row(attempt, y):
            return np.arange(len(y))

        return every_row


class RUSBoostedTrees(_BoostedBase):
    """SAMME boosting with per-round random undersampling to class balance.

    Before fitting each round's tree, every class is randomly downsampled
    (without replacement, seeded per attempt) to the minority-class count;
    the weight update still uses the full training set.
    """

    def _sampler(self):
        def undersample(attempt, y):
            counts = np.bincount(y)
            counts = counts[counts > 0]
            m = counts.min()
            rng = _rng_for(self.random_state, attempt)
            picks = []
            for c in np.unique(y):
                rows = np.flatnonzero(y == c)
                picks.append(rng.choice(rows, size=m, replace=False))
            return np.sort(np.concatenate(picks))

        return undersample


FAMILIES = {
    "lda": LinearDiscriminant,
    "svm": LinearSVM,
    "knn": WeightedKNN,
    "boosted": BoostedTrees,
    "bagged": BaggedTrees,
    "rusboost": RUSBoostedTrees,
}


def family_of(model) -> str:
    for name, cls in FAMILIES.items():
        if type(model) is cls:
            return name
    raise ValueError(f"unknown model type {type(model).__name__}")


def train_model(family: str, X, y, class_names, seed: int = 0, **overrides):
    """Construct, seed, and fit one of the six families.

    Attaches class_names_ and training_seed_ metadata used by the model
    file format and the CLI.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    cls = FAMILIES[family]
    params = dict(overrides)
    if "random_state" in cls().get_params():
        params.setdefault("random_state", seed)
    model = cls(**params)
    model.fit(np.asarray(X, dtype=np.float64), np.asarray(y))
    model.class_names_ = list(class_names)
    model.training_seed_ = seed
    return model


def predict_sample(model, x) -> Prediction:
    """Score one feature vector; label is argmax with lowest-index ties."""
    x = check_feature_vector(x, model.n_features_in_)
    scores = model.predict_proba(x.reshape(1, -1))[0]
    return Prediction(label=int(np.argmax(scores)), scores=scores)


def _state_of(model) -> dict:
    family = family_of(model)
    if family == "lda":
        return {
            "coef": model.coef_.tolist(),
            "intercept": model.intercept_.tolist(),
        }
    if family == "svm":
        return {
            "coef": model.coef_.tolist(),
            "intercept": model.intercept_.tolist(),
            "mean": model.mean_.tolist(),
            "scale": model.scale_.tolist(),
        }
    if family == "knn":
        return {
            "X": model.X_.tolist(),
            "y": model.y_.tolist(),
            "mean": model.mean_.tolist(),
            "scale": model.scale_.tolist(),
        }
    if family == "bagged":
        return {"trees": [t.root_.to_dict() for t in model.trees_]}
    # boosted / rusboost
    return {
        "trees": [t.root_.to_dict() for t in model.trees_],
        "alphas": model.alphas_,
        "errors": model.errors_,
    }


def _restore_state(model, family: str, state: dict, n_classes: int, n_features: int):
    model.n_classes_ = n_classes
    model.n_features_in_ = n_features
    if family == "lda":
        model.coef_ = np.asarray(state["coef"])
        model.intercept_ = np.asarray(state["intercept"])
    elif family == "svm":
        model.coef_ = np.asarray(state["coef"])
        model.intercept_ = np.asarray(state["intercept"])
        model.mean_ = np.asarray(state["mean"])
        model.scale_ = np.asarray(state["scale"])
    elif family == "knn":
        model.X_ = np.asarray(state["X"])
        model.y_ = np.asarray(state["y"], dtype=np.int64)
        model.mean_ = np.asarray(state["mean"])
        model.scale_ = np.asarray(state["scale"])
    else:
        trees = []
        for tree_dict in state["trees"]:
            t = DecisionTree()
            t.root_ = TreeNode.from_dict(tree_dict)
            t.n_classes_ = n_classes
            t.n_features_in_ = n_features
            trees.append(t)
        model.trees_ = trees
        if family in ("boosted", "rusboost"):
            model.alphas_ = [float(a) for a in state["alphas"]]
            model.errors_ = [float(e) for e in state["errors"]]
    return model


def save_model(model, path) -> None:
    """Serialize a fitted model to the versioned JSON format."""
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "family": family_of(model),
        "class_names": getattr(model, "class_names_", None)
        or [str(i) for i in range(model.n_classes_)],
        "feature_count": int(model.n_features_in_),
        "training_seed": getattr(model, "training_seed_", None),
        "hyperparameters": model.get_params(),
        "state": _state_of(model),
    }
    Path(path).write_text(json.dumps(payload) + "\n")


def load_model(path):
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"{path.name}: not a valid model file ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path.name}: not a {MODEL_FORMAT} file")
    version = payload.get("version")
    if not isinstance(version, int):
        raise ModelFormatError(f"{path.name}: missing integer version field")
    if version > MODEL_FORMAT_VERSION:
        raise ModelVersionError(
            f"{path.name}: format version {version} is newer than supported "
            f"version {MODEL_FORMAT_VERSION}"
        )
    try:
        family = payload["family"]
        cls = FAMILIES[family]
        model = cls(**payload["hyperparameters"])
        class_names = list(payload["class_names"])
        _restore_state(
            model, family, payload["state"], len(class_names), payload["feature_count"]
        )
        model.class_names_ = class_names
        model.training_seed_ = payload.get("training_seed")
    except (KeyError, TypeError, IndexError) as exc:
        raise ModelFormatError(f"{path.name}: malformed model payload ({exc})") from exc
    return model
