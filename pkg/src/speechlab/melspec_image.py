"""Render canonical clips as 64x64x3 normalized mel-spectrogram images.

64 mel bands (0..8 kHz) by 64 frames; the hop is chosen so exactly 64
1024-sample windows span a canonical clip, avoiding any resize
interpolation. Band energies are log10-compressed with a 1e-10 floor and
min-max normalized per image; the grayscale plane is replicated to three
channels. Row 0 is the lowest mel band.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .audio_io import AudioClip, CANONICAL_LENGTH, CorpusManifest, canonicalize, load_wav
from .dsp import hann_window, frame_matrix, mel_filterbank
from .labels import ALL_LABELS

N_BANDS = 64
N_FRAMES = 64
WINDOW = 1024
HOP = (CANONICAL_LENGTH - WINDOW) // (N_FRAMES - 1)  # 1253
LOG_FLOOR = 1e-10


@dataclass
class MelImage:
    """64x64x3 float image in [0, 1]; all three channels are identical."""

    pixels: np.ndarray
    clip_id: str
    label: str = ""


def melspectrogram_image(clip: AudioClip, label: str = "") -> MelImage:
    """Log-mel image of a canonical clip, min-max normalized to [0, 1]."""
    if not clip.is_canonical():
        raise ValueError("melspectrogram_image needs a canonical 5 s / 16 kHz clip")

    frames = frame_matrix(clip.samples, WINDOW, HOP)
    assert frames.shape[0] == N_FRAMES
    power = np.abs(np.fft.rfft(frames * hann_window(WINDOW), axis=1)) ** 2
    fb = mel_filterbank(N_BANDS, WINDOW, clip.sample_rate, 0.0, clip.sample_rate / 2.0)
    log_e = np.log10(np.maximum(power @ fb.weights.T, LOG_FLOOR))

    grid = log_e.T  # rows = mel bands, columns = frames
    lo, hi = grid.min(), grid.max()
    if hi - lo <= 0.0:
        norm = np.zeros_like(grid)
    else:
        norm = (grid - lo) / (hi - lo)
    pixels = np.repeat(norm[:, :, None], 3, axis=2)
    return MelImage(pixels=pixels, clip_id=clip.source_id, label=label)


def image_to_png_bytes(image: MelImage) -> bytes:
    quantized = np.round(image.pixels * 255.0).astype(np.uint8)
    import io

    buf = io.BytesIO()
    Image.fromarray(quantized, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def write_png(image: MelImage, path) -> None:
    Path(path).write_bytes(image_to_png_bytes(image))


def load_png(path) -> np.ndarray:
    """PNG back to float pixels in [0, 1] (quantized to 1/255 steps)."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return arr / 255.0


@dataclass
class ExportSummary:
    index_path: Path
    exported: list[dict]
    failures: list[tuple[str, str]]  # (entry path, reason)


def export_dataset(manifest: CorpusManifest, out_dir) -> ExportSummary:
    """Export one PNG per canonical clip plus an index JSON.

    Layout: out_dir/<label>/<clip_id>.png; the index lists paths relative
    to out_dir. Unreadable entries are collected as failures and skipped.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    index = []
    failures = []
    for entry in manifest.entries:
        if entry.label not in ALL_LABELS:
            failures.append((entry.path, f"unknown label {entry.label!r}"))
            continue
        try:
            clips = canonicalize(load_wav(manifest.resolve(entry)))
        except (OSError, ValueError) as exc:
            failures.append((entry.path, str(exc)))
            continue
        if not clips:
            failures.append((entry.path, "shorter than 5 s after resampling"))
            continue
        label_dir = out_dir / entry.label
        label_dir.mkdir(exist_ok=True)
        for clip in clips:
            image = melspectrogram_image(clip, label=entry.label)
            rel = f"{entry.label}/{clip.source_id}.png"
            write_png(image, out_dir / rel)
            index.append({"path": rel, "label": entry.label})

    index_path = out_dir / "index.json"
    index_path.write_text(json.dumps(index, indent=2) + "\n")
    return ExportSummary(index_path=index_path, exported=index, failures=failures)
