"""Deterministic synthetic speech corpus for desk-scale end-to-end runs.

Five classes with engineered signatures that differ exactly where the
detection features look: harmonic phase coupling (bicoherence), spectral
envelope (MFCC), and temporal modulation (delta features).

  Human       harmonic stack with pitch jitter + vibrato, formant-shaped
              envelope, syllabic amplitude modulation, breath noise
  IITM_TTS    flat pitch, odd harmonics only, near-noiseless, static
  Hearling    flat pitch, bright envelope, fast shallow AM, very clean
  AmazonPolly flat pitch, dark envelope, slow AM, strong noise floor
  VoiceMaker  flat pitch, harmonic phases re-randomized per block
              (kills quadratic phase coupling), static envelope

Same seed always regenerates a byte-identical corpus.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .audio_io import (
    AudioClip,
    CANONICAL_LENGTH,
    CANONICAL_RATE,
    ManifestEntry,
    save_manifest,
    write_wav,
)
from .dsp import hann_window
from .labels import MULTICLASS_LABELS

_SR = CANONICAL_RATE
_N = CANONICAL_LENGTH


def _harmonic_stack(f0_track, amps, phases):
    """Sum of harmonics h with instantaneous fundamental f0_track (Hz)."""
    base_phase = 2.0 * np.pi * np.cumsum(f0_track) / _SR
    out = np.zeros(_N)
    for h, (a, p) in enumerate(zip(amps, phases), start=1):
        if a == 0.0:
            continue
        out += a * np.cos(h * base_phase + p)
    return out


def _formant_envelope(centers):
    """Amplitude weight per harmonic frequency from Gaussian formant bumps."""

    def env(freqs):
        freqs = np.asarray(freqs, dtype=np.float64)
        total = np.full_like(freqs, 0.06)
        for fc in centers:
            total += np.exp(-((freqs - fc) ** 2) / (2.0 * (0.18 * fc) ** 2))
        return total

    return env


def _smooth_noise(rng, level, kernel=9):
    noise = rng.normal(0.0, 1.0, _N)
    k = hann_window(kernel)
    k /= k.sum()
    return level * np.convolve(noise, k, mode="same")


def _peak_normalize(x, peak):
    m = np.max(np.abs(x))
    return x * (peak / m) if m > 0 else x


def _human_clip(rng) -> np.ndarray:
    f0 = rng.uniform(115.0, 225.0)
    t = np.arange(_N) / _SR
    drift = np.cumsum(rng.normal(0.0, 1.0, _N))
    drift = 0.02 * drift / (np.max(np.abs(drift)) + 1e-12)
    vibrato = 0.03 * np.sin(2.0 * np.pi * rng.uniform(4.5, 6.5) * t + rng.uniform(0, 2 * np.pi))
    f0_track = f0 * (1.0 + vibrato + drift)

    env = _formant_envelope(
        [rng.uniform(350, 700), rng.uniform(1100, 1900), rng.uniform(2400, 3200)]
    )
    harmonics = np.arange(1, 13)
    amps = env(harmonics * f0) / harmonics
    voiced = _harmonic_stack(f0_track, amps, np.zeros(len(amps)))

    # syllable-ish compound amplitude modulation: much stronger temporal
    # dynamics than any of the TTS signatures
    am_fast = 0.55 + 0.45 * np.sin(
        2.0 * np.pi * rng.uniform(2.5, 5.0) * t + rng.uniform(0, 2 * np.pi)
    )
    am_slow = 0.6 + 0.4 * np.sin(
        2.0 * np.pi * rng.uniform(0.4, 1.2) * t + rng.uniform(0, 2 * np.pi)
    )
    return voiced * am_fast * am_slow + _smooth_noise(rng, 0.035)


def _tts_clip(rng, f0, harmonics, tilt, am_rate, am_depth, noise_level) -> np.ndarray:
    f0 = f0 + rng.uniform(-4.0, 4.0)  # flat within the clip, tiny spread across clips
    t = np.arange(_N) / _SR
    amps = np.zeros(max(harmonics))
    for h in harmonics:
        amps[h - 1] = 1.0 / h**tilt
    voiced = _harmonic_stack(np.full(_N, f0), amps, np.zeros(len(amps)))
    if am_depth > 0.0:
        voiced = voiced * (1.0 - am_depth + am_depth * np.sin(2.0 * np.pi * am_rate * t))
    return voiced + _smooth_noise(rng, noise_level)


def _phase_scrambled_clip(rng, f0, harmonics, tilt, noise_level, block=1024) -> np.ndarray:
    """Harmonic stack whose phases are redrawn per overlapped block.

    Blocks are Hann-windowed and overlap-added at 50%, so the signal stays
    locally harmonic but carries no consistent phase relation across time.
    """
    f0 = f0 + rng.uniform(-4.0, 4.0)
    amps = np.array([1.0 / h**tilt for h in harmonics], dtype=np.float64)
    window = hann_window(block)
    hop = block // 2
    t_block = np.arange(block) / _SR
    out = np.zeros(_N + block)
    for start in range(0, _N, hop):
        phases = rng.uniform(0.0, 2.0 * np.pi, len(harmonics))
        segment = np.zeros(block)
        for h, a, p in zip(harmonics, amps, phases):
            segment += a * np.cos(2.0 * np.pi * h * f0 * t_block + p)
        out[start : start + block] += segment * window
    return out[:_N] + _smooth_noise(rng, noise_level)


def synth_clip(label: str, rng: np.random.Generator) -> AudioClip:
    """One 5 s clip of the given class, drawn from `rng`."""
    if label == "Human":
        x = _human_clip(rng)
    elif label == "IITM_TTS":
        x = _tts_clip(rng, 150.0, [1, 3, 5, 7, 9, 11], 1.0, 0.0, 0.0, 0.003)
    elif label == "Hearling":
        x = _tts_clip(rng, 185.0, list(range(1, 15)), 0.7, 8.0, 0.12, 0.008)
    elif label == "AmazonPolly":
        x = _tts_clip(rng, 125.0, list(range(1, 11)), 2.2, 0.8, 0.12, 0.13)
    elif label == "VoiceMaker":
        x = _phase_scrambled_clip(rng, 205.0, list(range(1, 9)), 1.1, 0.01, block=512)
    else:
        raise ValueError(f"unknown synthetic class {label!r}")
    x = _peak_normalize(x, rng.uniform(0.55, 0.85))
    return AudioClip(samples=x, sample_rate=_SR)


def generate_corpus(out_dir, n_per_class: int, seed: int = 0) -> Path:
    """Write n_per_class WAVs per class plus manifest.json; returns its path."""
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for class_idx, label in enumerate(MULTICLASS_LABELS):
        for i in range(n_per_class):
            rng = np.random.default_rng(np.random.SeedSequence([seed, class_idx, i]))
            clip = synth_clip(label, rng)
            name = f"{label}_{i:04d}.wav"
            write_wav(out_dir / name, clip, encoding="pcm16")
            entries.append(ManifestEntry(path=name, label=label))
    manifest_path = out_dir / "manifest.json"
    save_manifest(entries, manifest_path)
    return manifest_path
