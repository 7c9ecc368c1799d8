"""Embedding files and audio-to-token matching.

Token embedding file format (UTF-8 JSON):

    {"dim": int, "entries": [{"token": str, "index": int, "vector": [float, ...]}, ...]}

Large sets may externalize vectors: an entry then carries "vector_file"
(path relative to the JSON file) and "row" instead of "vector", with the
sidecar holding little-endian 32-bit floats, row-major.

Audio embedding files are the single-vector analog:

    {"dim": int, "vector": [float, ...], "label": str}

Matching ranks prompt tokens by cosine similarity against one audio
embedding, ties broken by ascending prompt position.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateEmbedding, DimensionError, FormatError, ValidationError


@dataclass(frozen=True)
class EmbeddingEntry:
    token: str
    token_index: int
    vector: np.ndarray


@dataclass(frozen=True)
class EmbeddingSet:
    """Validated prompt-token embeddings, all sharing one dimension."""

    entries: tuple[EmbeddingEntry, ...]
    dim: int


@dataclass(frozen=True)
class AudioEmbedding:
    vector: np.ndarray
    source_label: str = ""


@dataclass(frozen=True)
class MatchResult:
    """Top-k tokens for one audio embedding, similarity descending."""

    ranked: tuple[tuple[str, int, float], ...]
    k: int


def _as_validated_vector(raw, dim: int, where: str) -> np.ndarray:
    if not isinstance(raw, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw):
        raise FormatError(f"{where}: vector must be a list of numbers")
    vec = np.asarray(raw, dtype=np.float64)
    if vec.size != dim:
        raise FormatError(f"{where}: vector has dim {vec.size}, expected {dim}")
    if not np.isfinite(vec).all():
        raise FormatError(f"{where}: vector contains non-finite values")
    if not vec.any():
        raise DegenerateEmbedding(f"{where}: vector is all-zero")
    vec.flags.writeable = False
    return vec


def _sidecar_vector(entry: dict, dim: int, base_dir, where: str) -> np.ndarray:
    if base_dir is None:
        raise FormatError(f"{where}: sidecar vector_file needs a base directory")
    row = entry.get("row")
    if not isinstance(row, int) or isinstance(row, bool) or row < 0:
        raise FormatError(f"{where}: row must be a non-negative integer")
    sidecar = Path(base_dir) / entry["vector_file"]
    try:
        blob = sidecar.read_bytes()
    except OSError as exc:
        raise FormatError(f"{where}: cannot read sidecar {sidecar}: {exc}") from exc
    stride = dim * 4
    offset = row * stride
    if offset + stride > len(blob):
        raise FormatError(f"{where}: row {row} beyond sidecar length")
    vec = np.frombuffer(blob, dtype="<f4", count=dim, offset=offset).astype(np.float64)
    if not np.isfinite(vec).all():
        raise FormatError(f"{where}: sidecar vector contains non-finite values")
    if not vec.any():
        raise DegenerateEmbedding(f"{where}: sidecar vector is all-zero")
    vec.flags.writeable = False
    return vec


def _parse_json(data) -> dict:
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise FormatError("top-level JSON value must be an object")
    return obj


def _parse_dim(obj: dict) -> int:
    dim = obj.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise FormatError("'dim' must be a positive integer")
    return dim


def load_embeddings(data, base_dir=None) -> EmbeddingSet:
    """Parse and validate a token embedding file (bytes or str)."""
    obj = _parse_json(data)
    dim = _parse_dim(obj)
    raw_entries = obj.get("entries")
    if not isinstance(raw_entries, list) or not raw_entries:
        raise FormatError("'entries' must be a non-empty list")

    entries = []
    seen_indices = set()
    for pos, entry in enumerate(raw_entries):
        where = f"entries[{pos}]"
        if not isinstance(entry, dict):
            raise FormatError(f"{where}: must be an object")
        token = entry.get("token")
        if not isinstance(token, str) or not token:
            raise FormatError(f"{where}: 'token' must be a non-empty string")
        index = entry.get("index")
        if not isinstance(index, int) or isinstance(index, bool) or index < 0:
            raise FormatError(f"{where}: 'index' must be a non-negative integer")
        if index in seen_indices:
            raise FormatError(f"{where}: duplicate token index {index}")
        seen_indices.add(index)
        if "vector" in entry:
            vec = _as_validated_vector(entry["vector"], dim, where)
        elif "vector_file" in entry:
            vec = _sidecar_vector(entry, dim, base_dir, where)
        else:
            raise FormatError(f"{where}: needs 'vector' or 'vector_file'")
        entries.append(EmbeddingEntry(token=token, token_index=index, vector=vec))
    return EmbeddingSet(entries=tuple(entries), dim=dim)


def load_embeddings_file(path) -> EmbeddingSet:
    path = Path(path)
    return load_embeddings(path.read_bytes(), base_dir=path.parent)


def load_audio_embedding(data, base_dir=None, label: str = "") -> AudioEmbedding:
    """Parse a single audio embedding file (bytes or str)."""
    obj = _parse_json(data)
    dim = _parse_dim(obj)
    if "vector" in obj:
        vec = _as_validated_vector(obj["vector"], dim, "audio embedding")
    elif "vector_file" in obj:
        vec = _sidecar_vector(obj, dim, base_dir, "audio embedding")
    else:
        raise FormatError("audio embedding needs 'vector' or 'vector_file'")
    raw_label = obj.get("label", label)
    if not isinstance(raw_label, str):
        raise FormatError("'label' must be a string")
    return AudioEmbedding(vector=vec, source_label=raw_label or label)


def load_audio_embedding_file(path) -> AudioEmbedding:
    path = Path(path)
    return load_audio_embedding(path.read_bytes(), base_dir=path.parent, label=str(path))


def cosine_similarity(a, b) -> float:
    """dot(a, b) / (|a| |b|), clamped into [-1, 1] against float drift."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise DimensionError("cosine_similarity expects 1-D vectors")
    if a.size != b.size:
        raise DimensionError(f"dimension mismatch: {a.size} vs {b.size}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise DegenerateEmbedding("cannot score an all-zero vector")
    return float(np.clip(float(a @ b) / (norm_a * norm_b), -1.0, 1.0))


def top_k_tokens(audio: AudioEmbedding, tokens: EmbeddingSet, k: int = 1) -> MatchResult:
    """The k prompt tokens most similar to the audio embedding.

    Similarity descending, ties by ascending token index; k larger than
    the token count returns every token ranked.
    """
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    if audio.vector.size != tokens.dim:
        raise DimensionError(
            f"audio embedding dim {audio.vector.size} != token dim {tokens.dim}"
        )
    scored = [
        (entry.token, entry.token_index, cosine_similarity(audio.vector, entry.vector))
        for entry in tokens.entries
    ]
    scored.sort(key=lambda item: (-item[2], item[1]))
    return MatchResult(ranked=tuple(scored[: min(k, len(scored))]), k=k)
