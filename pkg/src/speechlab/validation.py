"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np


def check_feature_matrix(X, n_features: int | None = None) -> np.ndarray:
    """Coerce to a finite 2-D float64 matrix, optionally with a fixed width."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("expected a non-empty 2-D feature matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains NaN or Inf")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(
            f"feature count mismatch: got {X.shape[1]} columns, expected {n_features}"
        )
    return X


def check_feature_vector(x, n_features: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape != (n_features,):
        raise ValueError(f"expected a length-{n_features} vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("feature vector contains NaN or Inf")
    return x


def check_training_set(X, y, min_classes: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Validate (X, y) for training: aligned lengths, integer labels 0..K-1."""
    X = check_feature_matrix(X)
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != X.shape[0]:
        raise ValueError("y must be 1-D with one label per row of X")
    if not np.issubdtype(y.dtype, np.integer):
        if not np.all(y == np.floor(y)):
            raise ValueError("labels must be integer class indices")
        y = y.astype(np.int64)
    else:
        y = y.astype(np.int64)
    if y.min() < 0:
        raise ValueError("class indices must be non-negative")
    if len(np.unique(y)) < min_classes:
        raise ValueError(f"training data needs at least {min_classes} distinct classes")
    return X, y
