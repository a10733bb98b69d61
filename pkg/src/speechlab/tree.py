"""CART decision tree: the shared base learner for the ensemble classifiers.

Binary axis-aligned splits chosen to minimize weighted Gini impurity, with
candidate thresholds at midpoints of consecutive distinct sorted values.
Ties are broken by lowest feature index, then lowest threshold, which keeps
training fully deterministic. Leaves store weighted class-frequency
distributions so ensembles can average probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .validation import check_feature_matrix, check_training_set


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    distribution: np.ndarray | None = None  # set on leaves only

    def is_leaf(self) -> bool:
        return self.distribution is not None

    def to_dict(self) -> dict:
        if self.is_leaf():
            return {"dist": [float(v) for v in self.distribution]}
        return {
            "feature": int(self.feature),
            "threshold": float(self.threshold),
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "TreeNode":
        if "dist" in d:
            return TreeNode(distribution=np.asarray(d["dist"], dtype=np.float64))
        return TreeNode(
            feature=int(d["feature"]),
            threshold=float(d["threshold"]),
            left=TreeNode.from_dict(d["left"]),
            right=TreeNode.from_dict(d["right"]),
        )


def _best_split(X, y, w, n_classes, feature_ids, min_leaf):
    """Lowest-Gini candidate split, or None when no candidate exists.

    Returns (gini, feature, threshold). The scan visits features in
    increasing index order and thresholds in increasing order, accepting
    only strictly better Gini, which implements the tie-break rule.
    """
    n = len(y)
    total_w = w.sum()
    best = None
    for f in feature_ids:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sv, sy, sw = col[order], y[order], w[order]

        class_w = np.zeros((n, n_classes))
        class_w[np.arange(n), sy] = sw
        left_cum = np.cumsum(class_w, axis=0)  # class weights in x[:i+1]

        # split after position i is valid when the value strictly increases
        # and both children keep at least min_leaf rows
        pos = np.arange(n - 1)
        valid = sv[pos] < sv[pos + 1]
        valid &= (pos + 1 >= min_leaf) & (n - pos - 1 >= min_leaf)
        if not valid.any():
            continue
        pos = pos[valid]

        wl = left_cum[pos].sum(axis=1)
        wr = total_w - wl
        sum_sq_l = (left_cum[pos] ** 2).sum(axis=1)
        right_cum = left_cum[-1] - left_cum[pos]
        sum_sq_r = (right_cum**2).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            gini = (wl - sum_sq_l / wl) + (wr - sum_sq_r / wr)
        gini = np.where((wl > 0) & (wr > 0), gini / total_w, np.inf)

        k = int(np.argmin(gini))  # first minimum -> lowest threshold
        if best is None or gini[k] < best[0]:
            thr = 0.5 * (sv[pos[k]] + sv[pos[k] + 1])
            best = (float(gini[k]), f, thr)
    return best


class DecisionTree(BaseEstimator, ClassifierMixin):
    """CART classifier with optional per-row weights and feature subsampling.

    max_depth=None grows until nodes are pure or unsplittable. min_leaf is
    an unweighted row count. feature_subsample < 1 draws that fraction of
    features (at least one) per node from `random_state`.
    """

    def __init__(self, max_depth=None, min_leaf=1, feature_subsample=1.0, random_state=None):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.feature_subsample = feature_subsample
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None, n_classes=None):
        X, y = check_training_set(X, y, min_classes=1)
        n, d = X.shape
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if sample_weight is None:
            w = np.full(n, 1.0 / n)
        else:
            w = np.asarray(sample_weight, dtype=np.float64)
            if w.shape != (n,) or np.any(w < 0) or w.sum() <= 0:
                raise ValueError("sample_weight must be non-negative with positive sum")

        self.n_classes_ = int(n_classes if n_classes is not None else y.max() + 1)
        self.n_features_in_ = d
        rng = np.random.default_rng(self.random_state)
        self.root_ = self._grow(X, y, w, depth=0, rng=rng)
        return self

    def _grow(self, X, y, w, depth, rng) -> TreeNode:
        counts = np.bincount(y, weights=w, minlength=self.n_classes_)
        total = counts.sum()
        if total <= 0:
            counts = np.bincount(y, minlength=self.n_classes_).astype(float)
            total = counts.sum()
        node_pure = np.count_nonzero(np.bincount(y, minlength=self.n_classes_)) <= 1
        depth_done = self.max_depth is not None and depth >= self.max_depth
        if node_pure or depth_done or len(y) < 2 * self.min_leaf:
            return TreeNode(distribution=counts / total)

        d = X.shape[1]
        if self.feature_subsample < 1.0:
            n_feat = max(1, int(round(self.feature_subsample * d)))
            feature_ids = np.sort(rng.choice(d, size=n_feat, replace=False))
        else:
            feature_ids = np.arange(d)

        best = _best_split(X, y, w, self.n_classes_, feature_ids, self.min_leaf)
        if best is None:
            return TreeNode(distribution=counts / total)

        _, f, thr = best
        go_left = X[:, f] <= thr
        # midpoints of adjacent floats can round onto the upper value,
        # leaving one side empty; bail out to a leaf instead of recursing
        if go_left.all() or not go_left.any():
            return TreeNode(distribution=counts / total)
        node = TreeNode(feature=f, threshold=thr)
        node.left = self._grow(X[go_left], y[go_left], w[go_left], depth + 1, rng)
        node.right = self._grow(X[~go_left], y[~go_left], w[~go_left], depth + 1, rng)
        return node

    def predict_proba(self, X) -> np.ndarray:
        X = check_feature_matrix(X, self.n_features_in_)
        out = np.empty((X.shape[0], self.n_classes_))
        for i, row in enumerate(X):
            node = self.root_
            while not node.is_leaf():
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.distribution
        return out

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)
