"""Export embeddings (and identity schedules) in the primary tool's file formats.

The written files are the contract: token embeddings as
{"dim", "entries": [{"token", "index", "vector"}]}, audio embeddings as
{"dim", "vector", "label"}, schedules in the versioned schedule schema.
Exports are deterministic: the same prompt and inputs produce identical
bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class ExportManifest:
    """What was exported, with which models, and where it landed."""

    prompt: str
    audio_files: list[str]
    text_encoder: str
    audio_encoder: str
    embedding_dim: int
    embeddings_path: str
    audio_embedding_paths: list[str]
    entries: list[dict] = field(default_factory=list)  # {"token", "index"}

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True)


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def export_embeddings(prompt: str, audio_files, out_dir, text_encoder, audio_encoder) -> ExportManifest:
    """Tokenize the prompt, embed everything, write the contract files.

    Writes tokens.json, audio_<i>.json per audio file, and manifest.json
    into out_dir; returns the manifest.
    """
    out_dir = Path(out_dir)
    tokens = text_encoder.tokenize(prompt)
    if not tokens:
        raise ValueError("prompt produced no tokens")
    vectors = text_encoder.encode_tokens(tokens)
    if len(vectors) != len(tokens):
        raise ValueError("encoder returned a vector count different from the token count")

    dim = int(vectors.shape[1])
    entries = [
        {"token": token, "index": index, "vector": [float(x) for x in vectors[index]]}
        for index, token in enumerate(tokens)
    ]
    embeddings_path = out_dir / "tokens.json"
    _write(embeddings_path, json.dumps({"dim": dim, "entries": entries}))

    audio_paths = []
    for i, audio_file in enumerate(audio_files):
        vec = audio_encoder.encode(audio_file)
        if vec.shape != (dim,):
            raise ValueError(
                f"audio embedding dim {vec.shape} does not match text dim {dim}; "
                "pair encoders from the same joint space"
            )
        path = out_dir / f"audio_{i}.json"
        _write(path, json.dumps({
            "dim": dim,
            "vector": [float(x) for x in vec],
            "label": str(audio_file),
        }))
        audio_paths.append(str(path))

    manifest = ExportManifest(
        prompt=prompt,
        audio_files=[str(p) for p in audio_files],
        text_encoder=text_encoder.name,
        audio_encoder=audio_encoder.name,
        embedding_dim=dim,
        embeddings_path=str(embeddings_path),
        audio_embedding_paths=audio_paths,
        entries=[{"token": t, "index": i} for i, t in enumerate(tokens)],
    )
    _write(out_dir / "manifest.json", manifest.to_json())
    return manifest


def write_identity_schedule(path, token_entries, frame_count: int, fps: float = 30.0, prompt: str = "") -> None:
    """All-multipliers-1 schedule: the backend must reproduce the unedited generation.

    token_entries is a list of {"token", "index"} dicts (manifest entries
    work directly).
    """
    indices = sorted(int(e["index"]) for e in token_entries)
    by_index = {int(e["index"]): str(e["token"]) for e in token_entries}
    doc = {
        "version": 1,
        "fps": int(fps) if float(fps).is_integer() else float(fps),
        "frame_count": int(frame_count),
        "prompt": prompt,
        "tokens": [{"index": i, "token": by_index[i]} for i in indices],
        "frames": [{str(i): 1.0 for i in indices} for _ in range(frame_count)],
    }
    _write(Path(path), json.dumps(doc, ensure_ascii=False, separators=(",", ":")))
