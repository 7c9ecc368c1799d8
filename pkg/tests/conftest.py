"""Shared fixtures: hand-built WAV bytes and synthetic guide signals.

WAV construction here is deliberately independent of aadiff.audio's
encoder so decode tests check against a second implementation of the
container layout.
"""

import struct

import numpy as np
import pytest


def build_wav_bytes(samples, sample_rate=44100, sample_format="s16le", channels=1):
    """Assemble a minimal RIFF/WAVE byte string field by field.

    `samples` is a 1-D list/array for mono or an (n, 2) array for stereo.
    s16le expects integer sample values, f32le float values.
    """
    arr = np.asarray(samples)
    if channels == 2:
        assert arr.ndim == 2 and arr.shape[1] == 2
    else:
        assert arr.ndim == 1
    if sample_format == "s16le":
        fmt_code, bits = 1, 16
        payload = arr.astype("<i2").tobytes()
    elif sample_format == "f32le":
        fmt_code, bits = 3, 32
        payload = arr.astype("<f4").tobytes()
    else:
        raise AssertionError(f"unknown format {sample_format}")
    block_align = channels * bits // 8
    byte_rate = sample_rate * block_align
    chunks = b"".join(
        [
            b"fmt ",
            struct.pack("<I", 16),
            struct.pack("<HHIIHH", fmt_code, channels, sample_rate, byte_rate, block_align, bits),
            b"data",
            struct.pack("<I", len(payload)),
            payload,
        ]
    )
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks


def thunder_signal(n_frames=150, seed=7):
    """Impulse-train guide signal: sparse decaying bursts over near-silence."""
    rng = np.random.default_rng(seed)
    values = np.full(n_frames, 0.02)
    position = int(rng.integers(3, 12))
    while position < n_frames:
        burst_len = int(rng.integers(4, 10))
        peak = float(rng.uniform(0.6, 1.0))
        for i in range(burst_len):
            if position + i < n_frames:
                values[position + i] += peak * np.exp(-0.7 * i)
        position += burst_len + int(rng.integers(10, 30))
    return values


def wildfire_signal(n_frames=150, seed=11):
    """Slow-ramp guide signal with mild crackle on top."""
    rng = np.random.default_rng(seed)
    ramp = np.linspace(0.05, 0.9, n_frames)
    crackle = 0.05 * rng.random(n_frames)
    return ramp + crackle


def amplitude_to_wav(frame_values, sample_rate=44100, fps=30):
    """Expand per-frame amplitudes into a constant-amplitude-per-frame clip.

    Each video frame's samples all carry that frame's amplitude, so the
    per-frame RMS envelope of the resulting clip equals frame_values.
    """
    spf = sample_rate // fps
    assert sample_rate % fps == 0
    samples = np.repeat(np.clip(np.asarray(frame_values, dtype=np.float64), 0.0, 1.0), spf)
    return build_wav_bytes(samples.astype("<f4"), sample_rate=sample_rate, sample_format="f32le")


@pytest.fixture
def sine_wav_bytes():
    t = np.arange(44100 * 2) / 44100.0
    samples = 0.5 * np.sin(2 * np.pi * 220.0 * t)
    return build_wav_bytes(samples.astype("<f4"), sample_format="f32le")


@pytest.fixture
def five_second_wav_bytes():
    t = np.arange(44100 * 5) / 44100.0
    samples = 0.4 * np.sin(2 * np.pi * 110.0 * t) * (0.5 + 0.5 * np.sin(2 * np.pi * 0.4 * t))
    return build_wav_bytes(samples.astype("<f4"), sample_format="f32le")


def embedding_file_bytes(entries, dim):
    """entries: list of (token, index, vector) triples."""
    import json

    return json.dumps(
        {
            "dim": dim,
            "entries": [
                {"token": token, "index": index, "vector": [float(x) for x in vector]}
                for token, index, vector in entries
            ],
        }
    ).encode("utf-8")


def audio_embedding_file_bytes(vector, label="clip"):
    import json

    return json.dumps(
        {"dim": len(vector), "vector": [float(x) for x in vector], "label": label}
    ).encode("utf-8")
