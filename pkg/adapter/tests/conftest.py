import struct

import numpy as np
import pytest


def wav_bytes(samples, sample_rate=8000):
    payload = np.asarray(samples, dtype="<f4").tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, 3, 1, sample_rate, sample_rate * 4, 4, 32,
        b"data", len(payload),
    )
    return header + payload


@pytest.fixture
def tone_wav(tmp_path):
    t = np.arange(8000) / 8000.0
    burst = np.where((t > 0.2) & (t < 0.4), 1.0, 0.1)
    samples = 0.6 * np.sin(2 * np.pi * 440.0 * t) * burst
    path = tmp_path / "tone.wav"
    path.write_bytes(wav_bytes(samples))
    return path
