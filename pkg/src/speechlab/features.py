"""Assembly and CSV persistence of the 14-D labeled feature vectors.

Column order is a frozen contract: the eight bicoherence moments (magnitude
then phase), then (mean, variance) for MFCC, delta and delta-square. The
last CSV column is the class label.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .audio_io import AudioClip
from .bicoherence import bicoherence_features, estimate_bicoherence
from .cepstral import cepstral_features
from .exceptions import CsvFormatError
from .labels import ALL_LABELS, coerce_label

FEATURE_COLUMNS = (
    "bic_mag_mean",
    "bic_mag_var",
    "bic_mag_skew",
    "bic_mag_kurt",
    "bic_ph_mean",
    "bic_ph_var",
    "bic_ph_skew",
    "bic_ph_kurt",
    "mfcc_mean",
    "mfcc_var",
    "delta_mean",
    "delta_var",
    "delta2_mean",
    "delta2_var",
)
LABEL_COLUMN = "label"
CSV_HEADER = ",".join(FEATURE_COLUMNS + (LABEL_COLUMN,))

N_FEATURES = len(FEATURE_COLUMNS)

# Column groups mirroring the individual-vs-combined feature experiments.
FEATURE_GROUPS = {
    "all": tuple(range(14)),
    "bicoherence": tuple(range(8)),
    "bic_mag": (0, 1, 2, 3),
    "bic_phase": (4, 5, 6, 7),
    "mfcc": (8, 9),
    "delta": (10, 11),
    "delta2": (12, 13),
}


@dataclass
class FeatureVector:
    """14 numeric features plus one class label."""

    values: np.ndarray
    label: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (N_FEATURES,):
            raise ValueError(f"expected {N_FEATURES} feature values")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")
        if self.label not in ALL_LABELS:
            raise ValueError(f"unknown label {self.label!r}")


def extract(clip: AudioClip, mode: str, label: str) -> FeatureVector:
    """Full feature vector of a canonical clip, labeled for `mode`."""
    if not clip.is_canonical():
        raise ValueError(
            "extract() needs a canonical clip (16 kHz, 80000 samples); "
            "run audio_io.canonicalize first"
        )
    values = np.concatenate(
        [bicoherence_features(estimate_bicoherence(clip)), cepstral_features(clip)]
    )
    return FeatureVector(values=values, label=coerce_label(label, mode))


def write_csv(vectors: list[FeatureVector], path) -> None:
    """Write vectors with 17-significant-digit decimals (lossless round-trip)."""
    if not vectors:
        raise ValueError("refusing to write an empty feature CSV")
    lines = [CSV_HEADER]
    for v in vectors:
        cells = [f"{x:.17g}" for x in v.values]
        cells.append(v.label)
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> list[FeatureVector]:
    """Read a feature CSV, enforcing the frozen header and cell types."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise CsvFormatError(f"{path.name}: empty file")

    header = lines[0].split(",")
    expected = list(FEATURE_COLUMNS + (LABEL_COLUMN,))
    if header != expected:
        missing = [c for c in expected if c not in header]
        extra = [c for c in header if c not in expected]
        detail = []
        if missing:
            detail.append(f"missing column(s) {missing}")
        if extra:
            detail.append(f"unexpected column(s) {extra}")
        if not detail:
            detail.append("columns out of order")
        raise CsvFormatError(f"{path.name}: bad header: {'; '.join(detail)}")

    vectors = []
    for row_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != N_FEATURES + 1:
            raise CsvFormatError(
                f"{path.name}: row {row_no} has {len(cells)} cells, "
                f"expected {N_FEATURES + 1}"
            )
        try:
            values = np.array([float(c) for c in cells[:N_FEATURES]])
        except ValueError as exc:
            raise CsvFormatError(
                f"{path.name}: row {row_no} has a non-numeric cell ({exc})"
            ) from exc
        label = cells[-1]
        if label not in ALL_LABELS:
            raise CsvFormatError(f"{path.name}: row {row_no} unknown label {label!r}")
        try:
            vectors.append(FeatureVector(values=values, label=label))
        except ValueError as exc:
            raise CsvFormatError(f"{path.name}: row {row_no}: {exc}") from exc
    return vectors


class FeatureExtractor(BaseEstimator, TransformerMixin):
    """Stateless transformer mapping canonical clips to the 14-D feature rows.

    Lets the extraction step slot into sklearn-style pipelines; fit is a
    no-op (there is nothing to learn).
    """

    def __init__(self, seg_len: int = 256, overlap: float = 0.5):
        self.seg_len = seg_len
        self.overlap = overlap

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        rows = []
        for clip in X:
            if not clip.is_canonical():
                raise ValueError("FeatureExtractor needs canonical clips")
            bmap = estimate_bicoherence(clip, seg_len=self.seg_len, overlap=self.overlap)
            rows.append(
                np.concatenate([bicoherence_features(bmap), cepstral_features(clip)])
            )
        return np.vstack(rows) if rows else np.empty((0, N_FEATURES))
