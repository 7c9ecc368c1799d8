"""WAV ingestion and video-frame-aligned sample windowing.

Supports the two PCM layouts we care about (s16le and f32le, mono or
stereo) and nothing else. Stereo is downmixed to mono by channel mean,
integer samples are rescaled to [-1, 1] by dividing by 32768, and float
samples are clamped to [-1, 1].

Frame windows are defined in exact rational arithmetic so that the
windows tile the clip with no overlap and no gaps at any frame rate,
including non-integer ones.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    DecodeError,
    EmptyAudio,
    GridMismatch,
    InvalidFps,
    UnsupportedFormat,
    ValidationError,
)

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003


@dataclass(frozen=True)
class AudioClip:
    """Decoded mono audio: float32 samples in [-1, 1] plus sample rate."""

    samples: np.ndarray
    sample_rate: int
    source_label: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float32)
        if samples.ndim != 1:
            raise ValidationError("AudioClip samples must be a 1-D sequence")
        if samples.size == 0:
            raise EmptyAudio("AudioClip must contain at least one sample")
        if not np.isfinite(samples).all():
            raise ValidationError("AudioClip samples must be finite")
        if float(np.abs(samples).max()) > 1.0:
            raise ValidationError("AudioClip samples must lie in [-1.0, 1.0]")
        if not isinstance(self.sample_rate, int) or self.sample_rate <= 0:
            raise ValidationError("sample_rate must be a positive integer")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class FrameGrid:
    """Partition of a clip into video-frame-aligned sample windows.

    samples_per_frame is kept as an exact Fraction (sample_rate / fps) so
    window boundaries are reproducible integers, never float guesses.
    """

    fps: float
    frame_count: int
    samples_per_frame: Fraction
    sample_rate: int
    sample_count: int

    def matches(self, clip: AudioClip) -> bool:
        return self.sample_rate == clip.sample_rate and self.sample_count == clip.samples.size

    def window_bounds(self, frame_index: int) -> tuple[int, int]:
        """Half-open sample range [start, end) of one frame window."""
        if not isinstance(frame_index, int) or isinstance(frame_index, bool):
            raise IndexError("frame_index must be an integer")
        if frame_index < 0 or frame_index >= self.frame_count:
            raise IndexError(
                f"frame_index {frame_index} out of range [0, {self.frame_count})"
            )
        spf = self.samples_per_frame
        start = (frame_index * spf.numerator) // spf.denominator
        end = ((frame_index + 1) * spf.numerator) // spf.denominator
        return min(start, self.sample_count), min(end, self.sample_count)


def decode_wav(data: bytes) -> AudioClip:
    """Decode a RIFF/WAVE byte string into a mono AudioClip.

    Raises DecodeError for a malformed container, UnsupportedFormat for
    codecs other than PCM s16le / f32le or more than two channels, and
    EmptyAudio for a zero-length data chunk.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise DecodeError("expected a byte sequence")
    data = bytes(data)
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise DecodeError("not a RIFF/WAVE container")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        body_end = body_start + chunk_size
        if body_end > len(data):
            raise DecodeError(f"chunk {chunk_id!r} truncated")
        body = data[body_start:body_end]
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise DecodeError("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            payload = body
        # other chunks (LIST, fact, ...) are skipped
        pos = body_end + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        raise DecodeError("missing fmt chunk")
    if payload is None:
        raise DecodeError("missing data chunk")

    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if audio_format == _WAVE_FORMAT_PCM and bits == 16:
        dtype, width = np.dtype("<i2"), 2
    elif audio_format == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        dtype, width = np.dtype("<f4"), 4
    else:
        raise UnsupportedFormat(
            f"only PCM s16le and f32le are supported (format={audio_format}, bits={bits})"
        )
    if channels not in (1, 2):
        raise UnsupportedFormat(f"{channels} channels unsupported (mono/stereo only)")
    if sample_rate <= 0:
        raise DecodeError("non-positive sample rate in header")

    if len(payload) == 0:
        raise EmptyAudio("zero-length data chunk")
    frame_bytes = width * channels
    if len(payload) % frame_bytes:
        raise DecodeError("data chunk length is not a whole number of sample frames")

    raw = np.frombuffer(payload, dtype=dtype)
    if channels == 2:
        raw = raw.reshape(-1, 2).mean(axis=1, dtype=np.float64)
    else:
        raw = raw.astype(np.float64)
    if dtype.kind == "i":
        samples = raw / 32768.0
    else:
        samples = np.clip(raw, -1.0, 1.0)
    return AudioClip(samples.astype(np.float32), int(sample_rate), source_label="<bytes>")


def encode_wav(clip: AudioClip, sample_format: str = "f32le") -> bytes:
    """Encode a clip back to mono WAV bytes (f32le round-trips bit-exactly)."""
    if sample_format == "f32le":
        fmt_code, bits = _WAVE_FORMAT_IEEE_FLOAT, 32
        frames = clip.samples.astype("<f4").tobytes()
    elif sample_format == "s16le":
        fmt_code, bits = _WAVE_FORMAT_PCM, 16
        scaled = np.clip(np.floor(clip.samples.astype(np.float64) * 32768.0 + 0.5), -32768, 32767)
        frames = scaled.astype("<i2").tobytes()
    else:
        raise UnsupportedFormat(f"unknown sample format {sample_format!r}")

    byte_rate = clip.sample_rate * bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(frames), b"WAVE",
        b"fmt ", 16, fmt_code, 1, clip.sample_rate, byte_rate, bits // 8, bits,
        b"data", len(frames),
    )
    return header + frames


def make_frame_grid(clip: AudioClip, fps: float = 30.0) -> FrameGrid:
    """Lay a video frame grid over a clip: frame_count = ceil(duration * fps).

    The trailing partial frame window is kept so the whole clip maps onto
    video frames.
    """
    if isinstance(fps, bool) or not isinstance(fps, (int, float, Fraction)):
        raise InvalidFps("fps must be a positive number")
    if not math.isfinite(float(fps)) or float(fps) <= 0:
        raise InvalidFps(f"fps must be positive, got {fps}")
    fps_exact = Fraction(fps)
    spf = Fraction(clip.sample_rate) / fps_exact
    n = clip.samples.size
    # ceil(n / spf) in exact integer arithmetic
    frame_count = -((-n * spf.denominator) // spf.numerator)
    return FrameGrid(
        fps=float(fps),
        frame_count=int(frame_count),
        samples_per_frame=spf,
        sample_rate=clip.sample_rate,
        sample_count=n,
    )


def frame_samples(clip: AudioClip, grid: FrameGrid, frame_index: int) -> np.ndarray:
    """Samples of one frame window; windows tile the clip exactly."""
    if not grid.matches(clip):
        raise GridMismatch("grid was not built from this clip")
    start, end = grid.window_bounds(frame_index)
    return clip.samples[start:end]
