"""WAV loading, resampling, and segmentation into canonical 5-second clips.

The analysis pipeline operates on mono 16 kHz clips of exactly 80000 samples
(5 s). ``canonicalize`` turns arbitrary loaded audio into a list of such
clips, discarding any trailing remainder shorter than 5 s.

The WAV reader is a small RIFF parser rather than a library wrapper so that
malformed containers and unsupported encodings raise distinct error types.
Supported encodings: PCM 16-bit and IEEE float 32-bit, 1 or 2 channels.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .exceptions import AudioFormatError, ManifestError, UnsupportedAudioError
from .labels import ALL_LABELS, mode_labels

CANONICAL_RATE = 16000
CANONICAL_SECONDS = 5.0
CANONICAL_LENGTH = int(CANONICAL_RATE * CANONICAL_SECONDS)  # 80000

_WAVE_FORMAT_PCM = 1
_WAVE_FORMAT_IEEE_FLOAT = 3


@dataclass
class AudioClip:
    """Mono audio in [-1, 1] with its sample rate and an opaque source id."""

    samples: np.ndarray
    sample_rate: int
    source_id: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("AudioClip needs a non-empty 1-D sample array")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("AudioClip samples must all be finite")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def is_canonical(self) -> bool:
        return (
            self.sample_rate == CANONICAL_RATE
            and len(self.samples) == CANONICAL_LENGTH
        )


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise AudioFormatError(f"truncated WAV file while reading {what}")
    return data


def load_wav(path) -> AudioClip:
    """Load a RIFF/WAVE file as a mono AudioClip.

    int16 samples are scaled by 1/32768; stereo channels are averaged.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        riff, _, wave_id = struct.unpack("<4sI4s", _read_exact(fh, 12, "RIFF header"))
        if riff != b"RIFF" or wave_id != b"WAVE":
            raise AudioFormatError(f"{path.name}: not a RIFF/WAVE file")

        fmt = None
        raw = None
        while fmt is None or raw is None:
            header = fh.read(8)
            if len(header) == 0:
                break
            if len(header) != 8:
                raise AudioFormatError(f"{path.name}: truncated chunk header")
            chunk_id, size = struct.unpack("<4sI", header)
            if chunk_id == b"fmt ":
                if size < 16:
                    raise AudioFormatError(f"{path.name}: fmt chunk too short")
                fmt = struct.unpack("<HHIIHH", _read_exact(fh, 16, "fmt chunk")[:16])
                fh.seek(size - 16 + (size & 1), 1)
            elif chunk_id == b"data":
                raw = _read_exact(fh, size, "data chunk")
            else:
                fh.seek(size + (size & 1), 1)

        if fmt is None or raw is None:
            raise AudioFormatError(f"{path.name}: missing fmt or data chunk")

    format_tag, channels, rate, _, _, bits = fmt
    if rate <= 0:
        raise AudioFormatError(f"{path.name}: invalid sample rate {rate}")
    if channels not in (1, 2):
        raise UnsupportedAudioError(f"{path.name}: {channels} channels unsupported")
    if format_tag == _WAVE_FORMAT_PCM:
        if bits != 16:
            raise UnsupportedAudioError(f"{path.name}: {bits}-bit PCM unsupported")
        data = np.frombuffer(raw[: len(raw) - len(raw) % (2 * channels)], dtype="<i2")
        samples = data.astype(np.float64) / 32768.0
    elif format_tag == _WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedAudioError(f"{path.name}: {bits}-bit float unsupported")
        data = np.frombuffer(raw[: len(raw) - len(raw) % (4 * channels)], dtype="<f4")
        samples = np.clip(data.astype(np.float64), -1.0, 1.0)
    else:
        raise UnsupportedAudioError(
            f"{path.name}: WAVE format tag {format_tag} unsupported"
        )

    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    if samples.size == 0:
        raise AudioFormatError(f"{path.name}: empty data chunk")
    return AudioClip(samples=samples, sample_rate=rate, source_id=path.stem)


def write_wav(path, clip: AudioClip, encoding: str = "pcm16") -> None:
    """Write a clip as mono PCM16 or float32 WAV."""
    if encoding == "pcm16":
        quantized = np.round(clip.samples * 32768.0)
        data = np.clip(quantized, -32768, 32767).astype("<i2").tobytes()
        format_tag, bits = _WAVE_FORMAT_PCM, 16
    elif encoding == "float32":
        data = clip.samples.astype("<f4").tobytes()
        format_tag, bits = _WAVE_FORMAT_IEEE_FLOAT, 32
    else:
        raise ValueError(f"unknown encoding {encoding!r}")

    block_align = bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(data),
        b"WAVE",
        b"fmt ",
        16,
        format_tag,
        1,
        clip.sample_rate,
        clip.sample_rate * block_align,
        block_align,
        bits,
        b"data",
        len(data),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data)


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Polyphase resampling; output length = round(len * target/source)."""
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == clip.sample_rate:
        return clip
    g = math.gcd(target_rate, clip.sample_rate)
    up, down = target_rate // g, clip.sample_rate // g
    out = resample_poly(clip.samples, up, down)
    want = round(len(clip.samples) * target_rate / clip.sample_rate)
    if len(out) > want:
        out = out[:want]
    elif len(out) < want:
        out = np.pad(out, (0, want - len(out)))
    return AudioClip(samples=out, sample_rate=target_rate, source_id=clip.source_id)


def canonicalize(clip: AudioClip) -> list[AudioClip]:
    """Resample to 16 kHz and cut into disjoint 80000-sample clips.

    The trailing remainder shorter than 5 s is discarded; clips shorter than
    5 s yield an empty list.
    """
    clip = resample(clip, CANONICAL_RATE)
    n_segments = len(clip.samples) // CANONICAL_LENGTH
    out = []
    for k in range(n_segments):
        seg = clip.samples[k * CANONICAL_LENGTH : (k + 1) * CANONICAL_LENGTH]
        out.append(
            AudioClip(
                samples=seg.copy(),
                sample_rate=CANONICAL_RATE,
                source_id=f"{clip.source_id}_{k:03d}" if n_segments > 1 else clip.source_id,
            )
        )
    return out


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str


@dataclass
class CorpusManifest:
    """Labeled corpus listing. Paths are relative to ``root`` unless absolute."""

    entries: list[ManifestEntry]
    labeling_mode: str
    root: Path = field(default_factory=Path)

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        return p if p.is_absolute() else self.root / p


def load_manifest(path, mode: str = "multiclass") -> CorpusManifest:
    """Read a manifest (JSON array of {"path", "label"}) and validate it.

    Labels are kept verbatim; they must be readable under `mode` (TTS labels
    are legal in binary mode because they coerce to AI at extraction time).
    """
    path = Path(path)
    valid = set(mode_labels(mode))
    if mode == "binary":
        valid.update(ALL_LABELS)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path.name}: not valid JSON ({exc})") from exc
    if not isinstance(raw, list):
        raise ManifestError(f"{path.name}: expected a JSON array of entries")

    entries = []
    seen = set()
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or "path" not in item or "label" not in item:
            raise ManifestError(f"{path.name}: entry {i} needs 'path' and 'label'")
        if item["label"] not in valid:
            raise ManifestError(
                f"{path.name}: entry {i} label {item['label']!r} invalid for {mode} mode"
            )
        if item["path"] in seen:
            raise ManifestError(f"{path.name}: duplicate path {item['path']!r}")
        seen.add(item["path"])
        entries.append(ManifestEntry(path=item["path"], label=item["label"]))
    return CorpusManifest(entries=entries, labeling_mode=mode, root=path.parent)


def save_manifest(entries: list[ManifestEntry], path) -> None:
    path = Path(path)
    payload = [{"path": e.path, "label": e.label} for e in entries]
    path.write_text(json.dumps(payload, indent=2) + "\n")
