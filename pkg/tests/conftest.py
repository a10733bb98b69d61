import numpy as np
import pytest

from speechlab import AudioClip
from speechlab.audio_io import CANONICAL_LENGTH, CANONICAL_RATE


def make_clip(samples, rate=CANONICAL_RATE, source_id="test"):
    return AudioClip(samples=np.asarray(samples, dtype=np.float64), sample_rate=rate, source_id=source_id)


def tone(freq, seconds=5.0, rate=CANONICAL_RATE, amp=0.5, phase=0.0):
    t = np.arange(int(round(seconds * rate))) / rate
    return amp * np.cos(2 * np.pi * freq * t + phase)


@pytest.fixture
def canonical_tone():
    """5 s, 16 kHz, 1 kHz tone clip."""
    return make_clip(tone(1000.0))


@pytest.fixture
def silence_clip():
    return make_clip(np.zeros(CANONICAL_LENGTH))


@pytest.fixture
def noise_clip():
    rng = np.random.default_rng(1234)
    return make_clip(0.3 * rng.standard_normal(CANONICAL_LENGTH).clip(-3, 3) / 3)
