"""MFCC matrices and their first and second temporal derivatives.

Pipeline: 25 ms frames at 10 ms hop, Hann window, 512-point DFT, 26
triangular mel filters over 0..Nyquist, log energies floored at 1e-10,
orthonormal DCT-II, coefficients 1..13 kept (the 0th, which carries overall
level, is dropped). Derivatives use the standard windowed linear-regression
formula with edge replication.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct

from .audio_io import AudioClip
from .bicoherence import moments
from .dsp import hann_window, frame_matrix, mel_filterbank
from .exceptions import InsufficientDataError

FRAME_SECONDS = 0.025
HOP_SECONDS = 0.010
N_FFT = 512
N_COEFFS = 13
N_FILTERS = 26
LOG_FLOOR = 1e-10


@dataclass
class CepstralMatrix:
    """[n_frames x n_coeffs] coefficients; order 0 = static, 1 = delta, 2 = delta^2."""

    coefficients: np.ndarray
    frame_hop_s: float
    order: int = 0

    @property
    def n_frames(self) -> int:
        return self.coefficients.shape[0]


@lru_cache(maxsize=8)
def _filterbank(n_filters: int, sample_rate: int):
    return mel_filterbank(n_filters, N_FFT, sample_rate, 0.0, sample_rate / 2.0)


def mfcc(clip: AudioClip, n_coeffs: int = N_COEFFS, n_filters: int = N_FILTERS) -> CepstralMatrix:
    """Mel-frequency cepstral coefficients of a clip."""
    frame_len = int(round(FRAME_SECONDS * clip.sample_rate))
    hop = int(round(HOP_SECONDS * clip.sample_rate))
    frames = frame_matrix(clip.samples, frame_len, hop)
    if frames.shape[0] == 0:
        raise InsufficientDataError(
            f"clip of {len(clip.samples)} samples is shorter than one "
            f"{frame_len}-sample frame"
        )

    windowed = frames * hann_window(frame_len)
    power = np.abs(np.fft.rfft(windowed, n=N_FFT, axis=1)) ** 2
    fb = _filterbank(n_filters, clip.sample_rate)
    energies = power @ fb.weights.T
    log_e = np.log(np.maximum(energies, LOG_FLOOR))
    cepstra = dct(log_e, type=2, norm="ortho", axis=1)
    return CepstralMatrix(
        coefficients=cepstra[:, 1 : n_coeffs + 1].copy(),
        frame_hop_s=hop / clip.sample_rate,
        order=0,
    )


def delta(matrix: CepstralMatrix, window: int = 2) -> CepstralMatrix:
    """Windowed-regression temporal derivative with edge replication.

    d[t] = sum_{n=1..window} n * (c[t+n] - c[t-n]) / (2 * sum n^2)
    """
    if window < 1:
        raise ValueError("delta window must be >= 1")
    if matrix.order >= 2:
        raise ValueError("no derivatives beyond delta^2")
    c = matrix.coefficients
    padded = np.pad(c, ((window, window), (0, 0)), mode="edge")
    norm = 2.0 * sum(n * n for n in range(1, window + 1))
    d = np.zeros_like(c)
    for n in range(1, window + 1):
        upper = padded[window + n : window + n + c.shape[0]]
        lower = padded[window - n : window - n + c.shape[0]]
        d += n * (upper - lower)
    return CepstralMatrix(
        coefficients=d / norm,
        frame_hop_s=matrix.frame_hop_s,
        order=matrix.order + 1,
    )


def cepstral_features(clip: AudioClip) -> np.ndarray:
    """(mean, variance) of the flattened MFCC, delta and delta^2 matrices."""
    static = mfcc(clip)
    d1 = delta(static)
    d2 = delta(d1)
    out = []
    for mat in (static, d1, d2):
        m = moments(mat.coefficients.ravel())
        out.extend([m.mean, m.variance])
    return np.array(out)
