"""Cross-attention reweighting: scale targeted token rows by a multiplier.

An AttentionMap is a dense token x spatial-cell grid of non-negative
weights. Reweighting multiplies whole token rows and leaves every other
row bit-identical; optional renormalization rescales each cell column
back to sum 1 (columns summing to 0 are skipped).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .schedule import EditSchedule

_NORMALIZED_TOL = 1e-6


@dataclass(frozen=True)
class AttentionMap:
    """Token x cell weight grid; `normalized` marks per-cell column sums of 1."""

    weights: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 2 or weights.size == 0:
            raise ValidationError("attention weights must be a non-empty 2-D grid")
        if not np.isfinite(weights).all():
            raise ValidationError("attention weights must be finite")
        if float(weights.min()) < 0.0:
            raise ValidationError("attention weights must be non-negative")
        if self.normalized:
            sums = weights.sum(axis=0)
            if not np.allclose(sums, 1.0, rtol=0.0, atol=_NORMALIZED_TOL):
                raise ValidationError("map marked normalized but cell columns do not sum to 1")
        weights.flags.writeable = False
        object.__setattr__(self, "weights", weights)

    @property
    def tokens(self) -> int:
        return self.weights.shape[0]

    @property
    def cells(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class ReweightSpec:
    """Which token rows to scale, and by how much."""

    targets: dict = field(default_factory=dict)
    renormalize: bool = False


def _check_targets(targets: dict, token_count: int):
    for index, multiplier in targets.items():
        if not isinstance(index, int) or isinstance(index, bool):
            raise IndexError(f"token index {index!r} must be an integer")
        if index < 0 or index >= token_count:
            raise IndexError(f"token index {index} out of range [0, {token_count})")
        if not (isinstance(multiplier, (int, float)) and np.isfinite(multiplier)):
            raise ValidationError(f"multiplier for token {index} must be a finite number")
        if multiplier < 0:
            raise ValidationError(f"multiplier for token {index} must be non-negative")


def reweight(amap: AttentionMap, spec: ReweightSpec) -> AttentionMap:
    """Scale each targeted token row; untargeted rows stay bit-identical."""
    _check_targets(spec.targets, amap.tokens)
    out = amap.weights.copy()
    for index, multiplier in spec.targets.items():
        out[index] *= float(multiplier)
    normalized = False
    if spec.renormalize:
        column_sums = out.sum(axis=0)
        positive = column_sums > 0.0
        out[:, positive] /= column_sums[positive]
        normalized = bool(positive.all())
    return AttentionMap(out, normalized=normalized)


def apply_schedule_step(amap: AttentionMap, schedule: EditSchedule, frame: int) -> AttentionMap:
    """Reweight with one frame's multiplier map.

    Meant to run once per denoising step of that frame with the same
    spec; an empty frame map is the identity.
    """
    if not isinstance(frame, int) or isinstance(frame, bool):
        raise IndexError("frame must be an integer")
    if frame < 0 or frame >= schedule.frame_count:
        raise IndexError(f"frame {frame} out of range [0, {schedule.frame_count})")
    return reweight(amap, ReweightSpec(targets=schedule.frames[frame]))


def region_mass(amap: AttentionMap, token_index: int) -> float:
    """Total attention carried by one token's row (edit-strength proxy)."""
    if not isinstance(token_index, int) or isinstance(token_index, bool):
        raise IndexError("token_index must be an integer")
    if token_index < 0 or token_index >= amap.tokens:
        raise IndexError(f"token_index {token_index} out of range [0, {amap.tokens})")
    return float(amap.weights[token_index].sum())
