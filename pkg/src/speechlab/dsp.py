"""Shared spectral primitives: framing, windowing, DFT, power spectra, mel filterbanks.

Everything in this module is a pure function of its inputs; filterbanks are
deterministic and safe to cache or share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError


@dataclass(frozen=True)
class Frame:
    """One analysis frame and its offset into the source signal."""

    values: np.ndarray
    start_index: int


@dataclass(frozen=True)
class MelFilterbank:
    """Triangular mel filterbank.

    weights has shape (n_filters, n_fft // 2 + 1); row i is the triangular
    response of filter i sampled at the one-sided DFT bin frequencies.
    band_edges_hz holds the n_filters + 2 edge frequencies in Hz.
    """

    weights: np.ndarray
    band_edges_hz: np.ndarray
    sample_rate: int
    n_fft: int


def frame_matrix(samples: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Frames as a (n_frames, frame_len) matrix at offsets 0, hop, 2*hop, ...

    Returns an empty (0, frame_len) matrix when the signal is shorter than
    one frame. n_frames = floor((len - frame_len) / hop) + 1.
    """
    if frame_len < 1 or hop < 1:
        raise ParameterError("frame_len and hop must both be >= 1")
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ParameterError("expected a 1-D sample array")
    if len(x) < frame_len:
        return np.empty((0, frame_len), dtype=np.float64)
    n_frames = (len(x) - frame_len) // hop + 1
    offsets = np.arange(n_frames) * hop
    idx = offsets[:, None] + np.arange(frame_len)[None, :]
    return x[idx]


def frame_signal(samples: np.ndarray, frame_len: int, hop: int) -> list[Frame]:
    """Split a signal into Frame records (see frame_matrix for the layout)."""
    mat = frame_matrix(samples, frame_len, hop)
    return [Frame(values=row, start_index=i * hop) for i, row in enumerate(mat)]


def hann_window(n: int) -> np.ndarray:
    """Symmetric Hann window w[k] = 0.5*(1 - cos(2*pi*k/(n-1))), endpoints 0."""
    if n < 2:
        raise ParameterError("hann_window needs n >= 2")
    k = np.arange(n, dtype=np.float64)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * k / (n - 1)))


def dft(frame: np.ndarray) -> np.ndarray:
    """X[k] = sum_n x[n] * exp(-2j*pi*k*n/N), full complex spectrum."""
    x = np.asarray(frame)
    if x.size < 1:
        raise ParameterError("dft needs at least one sample")
    return np.fft.fft(x)


def idft(spectrum: np.ndarray) -> np.ndarray:
    """Inverse of dft (complex output; real inputs recover with ~1e-16 imag)."""
    return np.fft.ifft(np.asarray(spectrum))


def power_spectrum(spectrum: np.ndarray) -> np.ndarray:
    """One-sided power P[k] = |X[k]|^2 for k = 0 .. N//2."""
    x = np.asarray(spectrum)
    n = len(x)
    return np.abs(x[: n // 2 + 1]) ** 2


def hz_to_mel(f):
    """mel(f) = 2595 * log10(1 + f/700)."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    n_filters: int, n_fft: int, sample_rate: int, fmin: float, fmax: float
) -> MelFilterbank:
    """Triangular filters with centers equally spaced on the mel scale.

    Filter i rises linearly from edge i to edge i+1 and falls to edge i+2,
    evaluated at the one-sided bin frequencies k * sample_rate / n_fft.
    """
    if n_filters < 1:
        raise ParameterError("n_filters must be >= 1")
    if not (0.0 <= fmin < fmax <= sample_rate / 2.0):
        raise ParameterError(
            f"need 0 <= fmin < fmax <= sample_rate/2, got fmin={fmin}, "
            f"fmax={fmax}, sample_rate={sample_rate}"
        )
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_filters + 2))
    bin_hz = np.arange(n_fft // 2 + 1, dtype=np.float64) * sample_rate / n_fft

    weights = np.zeros((n_filters, len(bin_hz)), dtype=np.float64)
    for i in range(n_filters):
        lower, center, upper = edges_hz[i], edges_hz[i + 1], edges_hz[i + 2]
        rising = (bin_hz - lower) / (center - lower)
        falling = (upper - bin_hz) / (upper - center)
        weights[i] = np.maximum(0.0, np.minimum(rising, falling))

    if np.any(weights.sum(axis=1) <= 0.0):
        raise ParameterError(
            "filterbank has an empty row; use fewer filters or a larger n_fft"
        )
    return MelFilterbank(
        weights=weights,
        band_edges_hz=edges_hz,
        sample_rate=sample_rate,
        n_fft=n_fft,
    )
