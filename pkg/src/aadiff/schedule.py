"""Per-frame edit schedules: assembly from sources, canonical JSON wire format.

Schedule JSON schema:

    {"version": 1, "fps": number, "frame_count": int, "prompt": str,
     "tokens": [{"index": int, "token": str}, ...],
     "frames": [{"<index>": number, ...}, ...]}

Frame maps key token indices as decimal strings. A token absent from a
frame map means "leave its attention untouched" downstream, so the
schedule stores only edits. Serialization is canonical: compact
separators, fixed key order, token and frame keys ascending, floats in
shortest round-trip form; equal schedules produce byte-identical output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .envelope import Envelope
from .errors import EmptySchedule, FormatError, GridMismatch, ValidationError
from .matching import MatchResult


@dataclass(frozen=True)
class EditSource:
    """One audio input's contribution: matched tokens plus multiplier series."""

    audio_label: str
    match: MatchResult
    multipliers: Envelope
    weight: float = 1.0

    def __post_init__(self):
        if self.multipliers.kind != "multiplier":
            raise ValidationError("EditSource expects an Envelope of kind 'multiplier'")
        if not (isinstance(self.weight, (int, float)) and math.isfinite(self.weight) and self.weight >= 0):
            raise ValidationError("source weight must be finite and non-negative")
        if not self.match.ranked:
            raise ValidationError("EditSource needs at least one matched token")


@dataclass(frozen=True)
class EditSchedule:
    """Per-frame map from prompt-token index to attention multiplier."""

    fps: float
    frame_count: int
    prompt: str
    tokens: tuple[tuple[int, str], ...]
    frames: tuple[dict, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.frames) != self.frame_count:
            raise ValidationError(
                f"frames length {len(self.frames)} != frame_count {self.frame_count}"
            )


def build_schedule(
    sources: list[EditSource],
    fps: float,
    frame_count: int,
    prompt: str = "",
) -> EditSchedule:
    """Sum weighted multiplier contributions per selected token per frame.

    A token selected by several sources receives the sum of their
    contributions; unselected tokens never appear in the frame maps.
    """
    if not sources:
        raise EmptySchedule("build_schedule needs at least one source")
    if not (isinstance(frame_count, int) and not isinstance(frame_count, bool) and frame_count > 0):
        raise ValidationError("frame_count must be a positive integer")
    if not (isinstance(fps, (int, float)) and math.isfinite(fps) and fps > 0):
        raise ValidationError("fps must be a positive number")

    token_names: dict[int, str] = {}
    for source in sources:
        if len(source.multipliers) != frame_count:
            raise GridMismatch(
                f"source {source.audio_label!r} has {len(source.multipliers)} frames, "
                f"schedule expects {frame_count}"
            )
        if source.multipliers.fps != fps:
            raise GridMismatch(f"source {source.audio_label!r} fps differs from schedule fps")
        for token, index, _sim in source.match.ranked:
            if token_names.setdefault(index, token) != token:
                raise ValidationError(
                    f"token index {index} named both {token_names[index]!r} and {token!r}"
                )

    frames = []
    for t in range(frame_count):
        per_token: dict[int, float] = {}
        for source in sources:
            contribution = source.weight * float(source.multipliers.values[t])
            for _token, index, _sim in source.match.ranked:
                per_token[index] = per_token.get(index, 0.0) + contribution
        frames.append(per_token)

    tokens = tuple(sorted(token_names.items()))
    return EditSchedule(
        fps=float(fps),
        frame_count=frame_count,
        prompt=prompt,
        tokens=tokens,
        frames=tuple(frames),
    )


def _canonical_number(value: float):
    # integral floats are emitted as JSON ints so canonical bytes are stable
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def serialize(schedule: EditSchedule) -> bytes:
    """Canonical JSON bytes; round-trips losslessly through parse."""
    doc = {
        "version": 1,
        "fps": _canonical_number(schedule.fps),
        "frame_count": schedule.frame_count,
        "prompt": schedule.prompt,
        "tokens": [{"index": i, "token": tok} for i, tok in sorted(schedule.tokens)],
        "frames": [
            {str(i): float(m) for i, m in sorted(frame.items())} for frame in schedule.frames
        ],
    }
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":"), allow_nan=False).encode("utf-8")


def _require(condition: bool, message: str):
    if not condition:
        raise FormatError(message)


def parse(data) -> EditSchedule:
    """Parse schedule JSON, enforcing every schema and domain invariant."""
    if isinstance(data, (bytes, bytearray)):
        data = bytes(data).decode("utf-8")
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "schedule must be a JSON object")
    expected_keys = {"version", "fps", "frame_count", "prompt", "tokens", "frames"}
    _require(set(doc) == expected_keys, f"schedule keys must be exactly {sorted(expected_keys)}")
    _require(doc["version"] == 1, f"unsupported schedule version {doc['version']!r}")

    fps = doc["fps"]
    _require(
        isinstance(fps, (int, float)) and not isinstance(fps, bool) and math.isfinite(fps) and fps > 0,
        "'fps' must be a positive number",
    )
    frame_count = doc["frame_count"]
    _require(
        isinstance(frame_count, int) and not isinstance(frame_count, bool) and frame_count > 0,
        "'frame_count' must be a positive integer",
    )
    _require(isinstance(doc["prompt"], str), "'prompt' must be a string")

    _require(isinstance(doc["tokens"], list), "'tokens' must be a list")
    tokens = []
    seen = set()
    for pos, item in enumerate(doc["tokens"]):
        where = f"tokens[{pos}]"
        _require(isinstance(item, dict) and set(item) == {"index", "token"}, f"{where}: must be {{index, token}}")
        index = item["index"]
        _require(
            isinstance(index, int) and not isinstance(index, bool) and index >= 0,
            f"{where}: 'index' must be a non-negative integer",
        )
        _require(isinstance(item["token"], str), f"{where}: 'token' must be a string")
        _require(index not in seen, f"{where}: duplicate token index {index}")
        seen.add(index)
        tokens.append((index, item["token"]))

    _require(isinstance(doc["frames"], list), "'frames' must be a list")
    if len(doc["frames"]) != frame_count:
        raise ValidationError(
            f"frames length {len(doc['frames'])} != frame_count {frame_count}"
        )
    frames = []
    for t, raw_frame in enumerate(doc["frames"]):
        where = f"frames[{t}]"
        _require(isinstance(raw_frame, dict), f"{where}: must be an object")
        frame = {}
        for key, value in raw_frame.items():
            try:
                index = int(key)
            except ValueError:
                raise FormatError(f"{where}: key {key!r} is not a decimal token index") from None
            _require(str(index) == key and index >= 0, f"{where}: key {key!r} is not canonical")
            _require(
                isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value),
                f"{where}: multiplier for token {index} must be a finite number",
            )
            if index not in seen:
                raise ValidationError(f"{where}: token index {index} not in token list")
            if value < 0:
                raise ValidationError(f"{where}: negative multiplier {value} for token {index}")
            frame[index] = float(value)
        frames.append(frame)

    return EditSchedule(
        fps=float(fps),
        frame_count=frame_count,
        prompt=doc["prompt"],
        tokens=tuple(sorted(tokens)),
        frames=tuple(frames),
    )
