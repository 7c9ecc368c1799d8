"""Deterministic toy frame synthesizer plus synchronization metrics.

Stands in for a diffusion backend at desk scale: each frame is rendered
independently from one base image by blending targeted regions toward an
effect color, with blend weight min(multiplier * attention, 1) per
pixel. The proxy score (attention-weighted closeness of pixels to the
effect color) is monotone in edit strength, so a schedule that tracks
the audio envelope must produce a proxy series that tracks it too.

Images travel as PPM (P6, 8-bit) files; metric series as CSV.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DegenerateSeries,
    DimensionError,
    FormatError,
    GridMismatch,
    ValidationError,
    WriteError,
)
from .ioutil import atomic_write_bytes
from .schedule import EditSchedule


@dataclass(frozen=True)
class MockImage:
    """H x W RGB image with float channels clamped into [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 3 or pixels.shape[2] != 3 or pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise ValidationError("pixels must be an H x W x 3 grid")
        if not np.isfinite(pixels).all():
            raise ValidationError("pixel values must be finite")
        pixels = np.clip(pixels, 0.0, 1.0)
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def solid_image(height: int, width: int, color=(0.5, 0.5, 0.5)) -> MockImage:
    if height < 1 or width < 1:
        raise ValidationError("image dimensions must be positive")
    return MockImage(np.broadcast_to(np.asarray(color, dtype=np.float64), (height, width, 3)).copy())


@dataclass(frozen=True)
class EffectSpec:
    """What one scheduled token does to the image: a color pushed into a region."""

    token_index: int
    effect_color: np.ndarray
    attention: np.ndarray  # flattened H*W attention row for this token

    def __post_init__(self):
        color = np.asarray(self.effect_color, dtype=np.float64)
        if color.shape != (3,):
            raise ValidationError("effect_color must have 3 channels")
        if not np.isfinite(color).all() or color.min() < 0.0 or color.max() > 1.0:
            raise ValidationError("effect_color channels must lie in [0, 1]")
        attention = np.asarray(self.attention, dtype=np.float64)
        if attention.ndim != 1 or attention.size == 0:
            raise ValidationError("attention row must be a non-empty 1-D array")
        if not np.isfinite(attention).all() or attention.min() < 0.0:
            raise ValidationError("attention row must be finite and non-negative")
        if not isinstance(self.token_index, int) or isinstance(self.token_index, bool) or self.token_index < 0:
            raise ValidationError("token_index must be a non-negative integer")
        color.flags.writeable = False
        attention.flags.writeable = False
        object.__setattr__(self, "effect_color", color)
        object.__setattr__(self, "attention", attention)


@dataclass(frozen=True)
class MetricSeries:
    """One real value per frame, under a column name."""

    values: np.ndarray
    name: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("metric series must be a non-empty 1-D array")
        if not np.isfinite(values).all():
            raise ValidationError("metric series values must be finite")
        if not isinstance(self.name, str) or not self.name:
            raise ValidationError("metric series needs a non-empty name")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


def render_frame(base: MockImage, effect: EffectSpec, multiplier: float) -> MockImage:
    """Blend the attention region toward the effect color.

    out = clamp01(base + min(multiplier * attn, 1) * (effect_color - base))
    per channel; multiplier 0 leaves the base untouched.
    """
    if not (isinstance(multiplier, (int, float)) and np.isfinite(multiplier) and multiplier >= 0):
        raise ValidationError("multiplier must be finite and non-negative")
    h, w = base.height, base.width
    if effect.attention.size != h * w:
        raise DimensionError(
            f"attention row has {effect.attention.size} cells, image has {h * w}"
        )
    weight = np.minimum(float(multiplier) * effect.attention, 1.0).reshape(h, w, 1)
    # convex form of base + weight * (effect_color - base): exact at weight 0 and 1
    blended = (1.0 - weight) * base.pixels + weight * effect.effect_color
    return MockImage(blended)


def render_video(base: MockImage, effects: list[EffectSpec], schedule: EditSchedule) -> list[MockImage]:
    """Render every frame independently from the same base image.

    Each frame applies the schedule's multipliers through the matching
    EffectSpecs in ascending token order.
    """
    by_token: dict[int, EffectSpec] = {}
    for effect in effects:
        if effect.token_index in by_token:
            raise ConfigError(f"duplicate EffectSpec for token {effect.token_index}")
        by_token[effect.token_index] = effect

    scheduled = {index for frame in schedule.frames for index in frame}
    missing = scheduled - set(by_token)
    if missing:
        raise ConfigError(f"no EffectSpec for scheduled token(s) {sorted(missing)}")

    frames = []
    for frame_map in schedule.frames:
        image = base
        for index in sorted(frame_map):
            image = render_frame(image, by_token[index], frame_map[index])
        frames.append(image)
    return frames


def proxy_score(frame: MockImage, effect: EffectSpec) -> float:
    """Attention-weighted closeness of pixels to the effect color, in [0, 1].

    Returns 0 when the attention row carries no mass.
    """
    h, w = frame.height, frame.width
    if effect.attention.size != h * w:
        raise DimensionError(
            f"attention row has {effect.attention.size} cells, image has {h * w}"
        )
    total = float(effect.attention.sum())
    if total == 0.0:
        return 0.0
    closeness = 1.0 - np.abs(frame.pixels - effect.effect_color).sum(axis=2) / 3.0
    return float((effect.attention.reshape(h, w) * closeness).sum() / total)


def pearson(a: MetricSeries, b: MetricSeries) -> float:
    """Pearson correlation coefficient of two equal-length series."""
    if len(a) != len(b):
        raise GridMismatch(f"series lengths differ: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise DegenerateSeries("need at least two points to correlate")
    da = a.values - a.values.mean()
    db = b.values - b.values.mean()
    denom = float(np.sqrt((da * da).sum() * (db * db).sum()))
    if denom == 0.0:
        raise DegenerateSeries("cannot correlate a constant series")
    return float(np.clip(float((da * db).sum()) / denom, -1.0, 1.0))


def plot_data_bytes(series: list[MetricSeries]) -> bytes:
    """CSV bytes with header frame,<name1>,<name2>,... one row per frame."""
    if not series:
        raise ConfigError("no metric series to export")
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise GridMismatch("all exported series must share a length")
    names = [s.name for s in series]
    if len(set(names)) != len(names):
        raise ConfigError("metric series names must be unique")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["frame", *names])
    for t in range(lengths.pop()):
        writer.writerow([t, *(repr(float(s.values[t])) for s in series)])
    return buf.getvalue().encode("utf-8")


def emit_plot_data(series: list[MetricSeries], path) -> None:
    """Write the metric series CSV atomically."""
    data = plot_data_bytes(series)
    try:
        atomic_write_bytes(path, data)
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


def ppm_bytes(image: MockImage) -> bytes:
    """P6 bytes, channels scaled by 255 and rounded half-up."""
    levels = np.floor(image.pixels * 255.0 + 0.5).astype(np.uint8)
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + levels.tobytes()


def write_ppm(image: MockImage, path) -> None:
    try:
        atomic_write_bytes(path, ppm_bytes(image))
    except OSError as exc:
        raise WriteError(f"cannot write {path}: {exc}") from exc


def _ppm_tokens(data: bytes):
    # header fields are whitespace separated; '#' starts a comment to end of line
    pos = 0
    while pos < len(data):
        byte = data[pos:pos + 1]
        if byte.isspace():
            pos += 1
        elif byte == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos:pos + 1].isspace():
                pos += 1
            yield data[start:pos], pos


def read_ppm(source) -> MockImage:
    """Read a P6 PPM (maxval 255) from bytes or a path."""
    data = Path(source).read_bytes() if not isinstance(source, (bytes, bytearray)) else bytes(source)
    fields = []
    pos = 0
    for token, end in _ppm_tokens(data):
        fields.append(token)
        pos = end
        if len(fields) == 4:
            break
    if len(fields) < 4 or fields[0] != b"P6":
        raise FormatError("not a P6 PPM image")
    try:
        width, height, maxval = (int(f) for f in fields[1:4])
    except ValueError:
        raise FormatError("PPM header fields must be integers") from None
    if width < 1 or height < 1:
        raise FormatError("PPM dimensions must be positive")
    if maxval != 255:
        raise FormatError(f"only maxval 255 is supported, got {maxval}")
    body = data[pos + 1:]  # single whitespace byte separates header from raster
    expected = width * height * 3
    if len(body) < expected:
        raise FormatError("PPM raster truncated")
    raster = np.frombuffer(body[:expected], dtype=np.uint8).reshape(height, width, 3)
    return MockImage(raster.astype(np.float64) / 255.0)


def make_gaussian_attention(height: int, width: int, center=(0.5, 0.5), sigma: float = 0.25) -> np.ndarray:
    """Deterministic attention blob with peak 1, flattened row-major.

    center is (y, x) in fractional image coordinates; sigma is a fraction
    of the smaller image side.
    """
    if height < 1 or width < 1:
        raise ValidationError("attention grid dimensions must be positive")
    if not 0 < sigma:
        raise ValidationError("sigma must be positive")
    cy = center[0] * (height - 1)
    cx = center[1] * (width - 1)
    sigma_px = sigma * min(height, width)
    yy, xx = np.mgrid[0:height, 0:width]
    dist_sq = (yy - cy) ** 2 + (xx - cx) ** 2
    blob = np.exp(-dist_sq / (2.0 * sigma_px**2))
    blob /= blob.max()
    return blob.reshape(-1)
