"""Stratified splits, 5-fold cross-validation, and classification metrics.

Metric conventions: accuracy is trace(confusion)/total; macro F1 averages
per-class F1 with empty classes contributing 0; ROC-AUC is the rank
statistic (ties count one half) macro-averaged one-vs-rest for more than
two classes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata
from sklearn.base import clone

from .classifiers import derive_seed
from .exceptions import UndefinedMetricError


@dataclass
class EvaluationReport:
    accuracy: float
    confusion: np.ndarray
    macro_f1: float
    roc_auc: float
    class_names: list[str]
    per_fold_accuracy: list[float] | None = None

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "macro_f1": self.macro_f1,
            "roc_auc": self.roc_auc,
            "per_fold_accuracy": self.per_fold_accuracy,
            "class_names": self.class_names,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @staticmethod
    def from_dict(d: dict) -> "EvaluationReport":
        return EvaluationReport(
            accuracy=d["accuracy"],
            confusion=np.asarray(d["confusion"], dtype=np.int64),
            macro_f1=d["macro_f1"],
            roc_auc=d["roc_auc"],
            class_names=list(d["class_names"]),
            per_fold_accuracy=d.get("per_fold_accuracy"),
        )


def stratified_split(y, fractions=(0.70, 0.15, 0.15), seed=0):
    """Disjoint, exhaustive per-class split; returns index arrays per part.

    Every class must have at least 3 samples. Per-class part sizes differ
    from the exact fractions by less than one sample; leftover slots after
    the per-class floor allocation go to whichever part is furthest below
    its exact global share, so the overall part sizes also stay exact when
    possible (100 balanced samples really split 70/15/15).
    """
    y = np.asarray(y)
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")
    rng = np.random.default_rng(seed)
    n_parts = len(fractions)
    parts = [[] for _ in range(n_parts)]
    global_counts = np.zeros(n_parts)
    seen = 0
    for c in np.unique(y):
        rows = np.flatnonzero(y == c)
        if len(rows) < 3:
            raise ValueError(f"class {c} has only {len(rows)} samples; need >= 3")
        rows = rng.permutation(rows)
        n_c = len(rows)
        seen += n_c
        exact = np.array(fractions) * n_c
        counts = np.floor(exact).astype(int)
        leftover = n_c - counts.sum()
        deficit = np.array(fractions) * seen - (global_counts + counts)
        # only parts with a fractional share may take an extra row, or the
        # per-class count would land a full sample away from exact
        eligible = [i for i in range(n_parts) if exact[i] - counts[i] > 1e-9]
        if len(eligible) < leftover:
            eligible = list(range(n_parts))
        for i in sorted(eligible, key=lambda i: (-deficit[i], i))[:leftover]:
            counts[i] += 1
        global_counts += counts
        start = 0
        for part, k in zip(parts, counts):
            part.append(rows[start : start + k])
            start += k
    return tuple(np.sort(np.concatenate(p)) for p in parts)


def stratified_folds(y, k: int, seed=0) -> list[np.ndarray]:
    """k disjoint exhaustive folds; per-class fold sizes differ by <= 1."""
    y = np.asarray(y)
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    for c in np.unique(y):
        rows = np.flatnonzero(y == c)
        if len(rows) < k:
            raise ValueError(f"class {c} has only {len(rows)} samples; need >= {k}")
        rows = rng.permutation(rows)
        for fold, chunk in zip(folds, np.array_split(rows, k)):
            fold.append(chunk)
    return [np.sort(np.concatenate(f)) for f in folds]


def confusion(y_true, y_pred, n_classes: int | None = None) -> np.ndarray:
    """counts[i][j] = number of samples with true class i predicted as j."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have equal length")
    k = int(n_classes if n_classes is not None else max(y_true.max(), y_pred.max()) + 1)
    out = np.zeros((k, k), dtype=np.int64)
    np.add.at(out, (y_true, y_pred), 1)
    return out


def accuracy(conf: np.ndarray) -> float:
    return float(np.trace(conf) / conf.sum())


def macro_f1(conf: np.ndarray) -> float:
    """Unweighted mean of per-class F1 = 2PR/(P+R); empty classes score 0."""
    conf = np.asarray(conf, dtype=np.float64)
    k = conf.shape[0]
    scores = np.zeros(k)
    for c in range(k):
        tp = conf[c, c]
        predicted = conf[:, c].sum()
        actual = conf[c, :].sum()
        precision = tp / predicted if predicted > 0 else 0.0
        recall = tp / actual if actual > 0 else 0.0
        if precision + recall > 0:
            scores[c] = 2 * precision * recall / (precision + recall)
    return float(scores.mean())


def roc_auc(y_true, scores) -> float:
    """Rank-statistic AUC; macro one-vs-rest average for multiclass scores.

    Classes without both a positive and a negative example are skipped;
    if nothing is evaluable the metric is undefined.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] != len(y_true):
        raise ValueError("scores must be (n_samples, n_classes)")
    if np.any(np.abs(scores.sum(axis=1) - 1.0) > 1e-6):
        raise ValueError("score rows must sum to 1")

    aucs = []
    for c in range(scores.shape[1]):
        pos = y_true == c
        n_pos = int(pos.sum())
        n_neg = len(y_true) - n_pos
        if n_pos == 0 or n_neg == 0:
            continue
        ranks = rankdata(scores[:, c], method="average")
        u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
        aucs.append(u / (n_pos * n_neg))
    if not aucs:
        raise UndefinedMetricError("no class has both positive and negative samples")
    return float(np.mean(aucs))


def evaluate_predictions(y_true, y_pred, scores, class_names) -> EvaluationReport:
    conf = confusion(y_true, y_pred, n_classes=len(class_names))
    return EvaluationReport(
        accuracy=accuracy(conf),
        confusion=conf,
        macro_f1=macro_f1(conf),
        roc_auc=roc_auc(y_true, scores),
        class_names=list(class_names),
    )


def kfold_cv(X, y, estimator, class_names, k: int = 5, seed: int = 0) -> EvaluationReport:
    """Stratified k-fold cross-validation of an unfitted estimator.

    Each fold trains a clone on the remaining folds; seeded estimators get
    a per-fold seed derived from (seed, fold), so a parallel run would
    reproduce the sequential result. Predictions are pooled for the
    confusion matrix, macro F1 and ROC-AUC; accuracy is the pooled
    trace/total identity, with per-fold accuracies reported alongside.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    folds = stratified_folds(y, k, seed=seed)

    pooled_true, pooled_pred, pooled_scores, per_fold = [], [], [], []
    for fold_idx, test_rows in enumerate(folds):
        train_mask = np.ones(len(y), dtype=bool)
        train_mask[test_rows] = False
        model = clone(estimator)
        if "random_state" in model.get_params():
            model.set_params(random_state=derive_seed(seed, fold_idx))
        model.fit(X[train_mask], y[train_mask])
        pred = model.predict(X[test_rows])
        pooled_true.append(y[test_rows])
        pooled_pred.append(pred)
        pooled_scores.append(model.predict_proba(X[test_rows]))
        per_fold.append(float(np.mean(pred == y[test_rows])))

    report = evaluate_predictions(
        np.concatenate(pooled_true),
        np.concatenate(pooled_pred),
        np.vstack(pooled_scores),
        class_names,
    )
    report.per_fold_accuracy = per_fold
    return report
