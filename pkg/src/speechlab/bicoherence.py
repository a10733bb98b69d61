"""Bicoherence estimation and its statistical-moment summary.

The bicoherence is the bispectrum normalized so its magnitude lies in [0, 1]:
with per-segment spectra X(f),

    B(f1, f2)  = mean_seg[ X(f1) * X(f2) * conj(X(f1+f2)) ]
    b(f1, f2)  = |B| / sqrt( mean_seg|X(f1)X(f2)|^2 * mean_seg|X(f1+f2)|^2 )

The normalization is a Cauchy-Schwarz ratio, so 0 <= b <= 1 up to rounding,
and scaling the input signal cancels exactly. A bin pair lights up when the
three components at f1, f2 and f1+f2 keep a consistent phase relation across
segments (quadratic phase coupling); incoherent content averages out.

Only the non-redundant triangle f2 <= f1, f1 + f2 <= Nyquist is populated,
excluding the DC row/column (segments are mean-removed, leaving bin 0 empty).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip
from .dsp import frame_matrix, hann_window
from .exceptions import InsufficientDataError, ParameterError

MIN_SEGMENTS = 8
DEFAULT_SEG_LEN = 256
DEFAULT_OVERLAP = 0.5

_DEGENERATE_VARIANCE = 1e-12


@dataclass(frozen=True)
class MomentSet:
    """Mean, variance, skewness and kurtosis of a value collection."""

    mean: float
    variance: float
    skewness: float
    kurtosis: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mean, self.variance, self.skewness, self.kurtosis])


@dataclass
class BicoherenceMap:
    """Bicoherence magnitude/phase over the non-redundant frequency triangle.

    magnitude and phase are (grid_size, grid_size) arrays indexed [f1, f2],
    zero outside the populated triangle given by ``mask``. ``freq_hz`` maps
    bin index to frequency.
    """

    magnitude: np.ndarray
    phase: np.ndarray
    mask: np.ndarray
    freq_hz: np.ndarray
    grid_size: int
    segment_count: int

    def triangle_magnitudes(self) -> np.ndarray:
        return self.magnitude[self.mask]

    def triangle_phases(self) -> np.ndarray:
        return self.phase[self.mask]

    def bin_of(self, freq: float) -> int:
        """Index of the frequency bin nearest to `freq` (Hz)."""
        return int(np.argmin(np.abs(self.freq_hz - freq)))


def triangle_mask(n_bins: int) -> np.ndarray:
    """Boolean (n_bins, n_bins) mask of the populated triangle.

    Cell (i, j) is populated when 1 <= j <= i and i + j <= Nyquist index
    (n_bins - 1).
    """
    idx = np.arange(n_bins)
    i, j = idx[:, None], idx[None, :]
    return (j >= 1) & (j <= i) & (i + j <= n_bins - 1)


def estimate_bicoherence(
    clip: AudioClip,
    seg_len: int = DEFAULT_SEG_LEN,
    overlap: float = DEFAULT_OVERLAP,
) -> BicoherenceMap:
    """Estimate the bicoherence of a clip by segment averaging.

    Segments are mean-removed and Hann-tapered before the FFT. At least
    MIN_SEGMENTS segments must fit, otherwise the estimator variance is too
    high to be meaningful and InsufficientDataError is raised.
    """
    if seg_len < 16 or seg_len & (seg_len - 1) != 0:
        raise ParameterError("seg_len must be a power of two >= 16")
    if not 0.0 <= overlap < 1.0:
        raise ParameterError("overlap must be in [0, 1)")

    hop = max(1, int(round(seg_len * (1.0 - overlap))))
    segments = frame_matrix(clip.samples, seg_len, hop)
    n_seg = segments.shape[0]
    if n_seg < MIN_SEGMENTS:
        raise InsufficientDataError(
            f"only {n_seg} segments of {seg_len} samples fit "
            f"(need >= {MIN_SEGMENTS}); use a longer clip or shorter segments"
        )

    window = hann_window(seg_len)
    tapered = (segments - segments.mean(axis=1, keepdims=True)) * window
    spectra = np.fft.rfft(tapered, axis=1)

    n_bins = seg_len // 2 + 1
    mask = triangle_mask(n_bins)
    fi, fj = np.nonzero(mask)

    x1 = spectra[:, fi]
    x2 = spectra[:, fj]
    x3 = spectra[:, fi + fj]
    pair = x1 * x2
    bispec = np.mean(pair * np.conj(x3), axis=0)
    denom = np.sqrt(
        np.mean(np.abs(pair) ** 2, axis=0) * np.mean(np.abs(x3) ** 2, axis=0)
    )

    with np.errstate(invalid="ignore", divide="ignore"):
        mag = np.where(denom > 0.0, np.abs(bispec) / denom, 0.0)
    phase = np.where(denom > 0.0, np.angle(bispec), 0.0)
    phase = np.where(phase <= -np.pi, phase + 2.0 * np.pi, phase)

    magnitude = np.zeros((n_bins, n_bins))
    phases = np.zeros((n_bins, n_bins))
    magnitude[fi, fj] = mag
    phases[fi, fj] = phase

    return BicoherenceMap(
        magnitude=magnitude,
        phase=phases,
        mask=mask,
        freq_hz=np.arange(n_bins) * clip.sample_rate / seg_len,
        grid_size=n_bins,
        segment_count=n_seg,
    )


def moments(values) -> MomentSet:
    """Population moments with standardized skewness and kurtosis.

    mean = avg(x); variance = avg((x - mean)^2);
    skewness = avg(((x - mean)/s)^3) and kurtosis = avg(((x - mean)/s)^4)
    with s = sqrt(variance). Collections with variance <= 1e-12 get
    skewness = kurtosis = 0 so silent/constant inputs stay well-defined.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("moments() needs a non-empty collection")
    if not np.all(np.isfinite(x)):
        raise ValueError("moments() needs finite values")
    mean = float(np.mean(x))
    centered = x - mean
    variance = float(np.mean(centered**2))
    if variance <= _DEGENERATE_VARIANCE:
        return MomentSet(mean=mean, variance=variance, skewness=0.0, kurtosis=0.0)
    z = centered / np.sqrt(variance)
    return MomentSet(
        mean=mean,
        variance=variance,
        skewness=float(np.mean(z**3)),
        kurtosis=float(np.mean(z**4)),
    )


def bicoherence_features(bmap: BicoherenceMap) -> np.ndarray:
    """[mean, var, skew, kurt] of the triangle magnitudes, then of the phases."""
    mag = moments(bmap.triangle_magnitudes())
    ph = moments(bmap.triangle_phases())
    return np.concatenate([mag.as_array(), ph.as_array()])
