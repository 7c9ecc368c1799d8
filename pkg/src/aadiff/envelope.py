"""Per-frame audio magnitude: extraction, sliding-window smoothing, gain mapping.

The envelope is the per-video-frame magnitude of the clip (RMS by
default, peak optionally). Smoothing is a truncated windowed mean with a
configurable window size; mapping to attention multipliers is a
normalize-then-affine step controlled by GainConfig.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np

from .audio import AudioClip, FrameGrid
from .errors import GridMismatch, InvalidWindow, ValidationError, WriteError
from .ioutil import atomic_write_bytes

ENVELOPE_KINDS = ("raw", "smoothed", "multiplier")


@dataclass(frozen=True)
class Envelope:
    """Non-negative per-frame magnitude series at a fixed frame rate."""

    values: np.ndarray
    fps: float
    kind: str = "raw"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("Envelope values must be a non-empty 1-D sequence")
        if not np.isfinite(values).all():
            raise ValidationError("Envelope values must be finite")
        if float(values.min()) < 0.0:
            raise ValidationError("Envelope values must be non-negative")
        if self.kind not in ENVELOPE_KINDS:
            raise ValidationError(f"kind must be one of {ENVELOPE_KINDS}, got {self.kind!r}")
        if not self.fps > 0:
            raise ValidationError("fps must be positive")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SmoothingConfig:
    """Sliding-window settings: window size in frames plus alignment mode."""

    window_size_s: int = 75
    mode: str = "centered"

    def __post_init__(self):
        if isinstance(self.window_size_s, bool) or not isinstance(self.window_size_s, int):
            raise InvalidWindow("window size must be an integer number of frames")
        if self.window_size_s < 1:
            raise InvalidWindow(f"window size must be >= 1, got {self.window_size_s}")
        if self.mode not in ("centered", "causal"):
            raise ValidationError(f"mode must be 'centered' or 'causal', got {self.mode!r}")


@dataclass(frozen=True)
class GainConfig:
    """Mapping from smoothed magnitude to attention multiplier.

    With normalization="max" the envelope peak is mapped to `gain` and
    zero magnitude to `floor`; with "none" values are scaled by `gain`
    directly.
    """

    gain: float = 1.0
    floor: float = 0.0
    normalization: str = "max"

    def __post_init__(self):
        if not (isinstance(self.gain, (int, float)) and np.isfinite(self.gain) and self.gain >= 0):
            raise ValidationError("gain must be a finite non-negative number")
        if not (isinstance(self.floor, (int, float)) and np.isfinite(self.floor) and self.floor >= 0):
            raise ValidationError("floor must be a finite non-negative number")
        if self.normalization not in ("max", "none"):
            raise ValidationError(f"normalization must be 'max' or 'none', got {self.normalization!r}")
        if self.normalization == "max" and self.floor > self.gain:
            raise ValidationError("floor must not exceed gain under max normalization")


def compute_envelope(clip: AudioClip, grid: FrameGrid, metric: str = "rms") -> Envelope:
    """Per-frame magnitude of the clip: RMS or peak of each frame window."""
    if metric not in ("rms", "peak"):
        raise ValidationError(f"metric must be 'rms' or 'peak', got {metric!r}")
    if not grid.matches(clip):
        raise GridMismatch("grid was not built from this clip")
    samples = clip.samples.astype(np.float64)
    values = np.zeros(grid.frame_count, dtype=np.float64)
    for t in range(grid.frame_count):
        start, end = grid.window_bounds(t)
        if end <= start:
            continue  # empty window aggregates to 0
        window = samples[start:end]
        if metric == "rms":
            values[t] = np.sqrt(np.mean(window * window))
        else:
            values[t] = np.abs(window).max()
    return Envelope(values, fps=grid.fps, kind="raw")


def smooth(env: Envelope, cfg: SmoothingConfig) -> Envelope:
    """Sliding-window mean of the envelope, truncated at the clip bounds.

    Centered mode averages indices [t - floor((s-1)/2), t + floor(s/2)],
    causal mode averages [t - s + 1, t]; both intersect the window with
    [0, N-1]. s=1 returns the values unchanged.
    """
    if env.kind == "multiplier":
        raise ValidationError("smooth expects a raw or smoothed envelope")
    s = cfg.window_size_s
    values = env.values
    if s == 1:
        return Envelope(values, fps=env.fps, kind="smoothed")
    n = values.size
    out = np.empty(n, dtype=np.float64)
    if cfg.mode == "centered":
        left = (s - 1) // 2
        right = s // 2
        for t in range(n):
            lo = max(0, t - left)
            hi = min(n, t + right + 1)
            out[t] = values[lo:hi].mean()
    else:
        for t in range(n):
            lo = max(0, t - s + 1)
            out[t] = values[lo:t + 1].mean()
    return Envelope(out, fps=env.fps, kind="smoothed")


def to_multipliers(env: Envelope, cfg: GainConfig) -> Envelope:
    """Map a smoothed envelope onto attention multipliers.

    max normalization: m[t] = floor + (gain - floor) * v[t] / max(v),
    falling back to floor everywhere when the envelope is all-zero.
    none: m[t] = gain * v[t].
    """
    if env.kind == "multiplier":
        raise ValidationError("envelope already holds multipliers")
    if env.kind == "raw":
        warnings.warn("mapping a raw (unsmoothed) envelope to multipliers", stacklevel=2)
    values = env.values
    if cfg.normalization == "max":
        peak = float(values.max())
        if peak == 0.0:
            out = np.full(values.size, float(cfg.floor))
        else:
            out = cfg.floor + (cfg.gain - cfg.floor) * (values / peak)
    else:
        out = cfg.gain * values
    return Envelope(out, fps=env.fps, kind="multiplier")


def mix_envelopes(envs: list[Envelope], weights: list[float]) -> Envelope:
    """Pointwise weighted sum of envelopes sharing one frame grid."""
    if not envs:
        raise ValidationError("mix_envelopes needs at least one envelope")
    if len(weights) != len(envs):
        raise GridMismatch("weights must pair one-to-one with envelopes")
    first = envs[0]
    for env in envs[1:]:
        if len(env) != len(first) or env.fps != first.fps:
            raise GridMismatch("all envelopes must share fps and length")
    for w in weights:
        if not (isinstance(w, (int, float)) and np.isfinite(w) and w >= 0):
            raise ValidationError("weights must be finite and non-negative")
    total = np.zeros(len(first), dtype=np.float64)
    for env, w in zip(envs, weights):
        total += w * env.values
    return Envelope(total, fps=first.fps, kind=first.kind)


def total_variation(env: Envelope) -> float:
    """Sum of absolute successive differences; 0 for constant envelopes."""
    return float(np.abs(np.diff(env.values)).sum())


def envelope_csv_bytes(columns: dict[str, Envelope]) -> bytes:
    """Render envelopes as CSV (frame index plus one column per name)."""
    if not columns:
        raise ValidationError("no envelope columns to export")
    lengths = {len(env) for env in columns.values()}
    if len(lengths) != 1:
        raise GridMismatch("all exported envelopes must share a length")
    n = lengths.pop()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["frame", *columns.keys()])
    for t in range(n):
        writer.writerow([t, *(repr(float(env.values[t])) for env in columns.values())])
    return buf.getvalue().encode("utf-8")


def write_envelope_csv(path, columns: dict[str, Envelope]) -> None:
    try:
        atomic_write_bytes(path, envelope_csv_bytes(columns))
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc
