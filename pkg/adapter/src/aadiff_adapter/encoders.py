"""Text and audio encoders behind one small interface.

Two families:

* Offline deterministic encoders (default): hashed-projection text
  vectors and spectral-feature audio vectors. They need no downloads and
  guarantee the file-format contract and reproducibility, not semantic
  similarity.
* Pretrained encoders (CLIP text tower, CLAP audio tower) behind lazy
  transformers imports; dims are read from the model config. These need
  local weights and raise ModelLoadError otherwise.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ModelLoadError

_TOKEN_SPLIT_KEEP = "abcdefghijklmnopqrstuvwxyz0123456789'"


def simple_tokenize(prompt: str) -> list[str]:
    """Lowercased word tokens; indices are positions in this list."""
    tokens = []
    current = []
    for ch in prompt.lower():
        if ch in _TOKEN_SPLIT_KEEP:
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


def _seeded_unit_vector(key: str, dim: int) -> np.ndarray:
    seed = int.from_bytes(hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest(), "little")
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


def read_wav_mono(path) -> tuple[np.ndarray, int]:
    """Minimal mono WAV reader (PCM s16le / f32le) for feature extraction."""
    data = open(path, "rb").read()
    if data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ValueError(f"{path}: not a WAV file")
    pos, fmt, payload = 12, None, None
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None or payload is None:
        raise ValueError(f"{path}: missing fmt/data chunk")
    code, channels, rate, _, _, bits = fmt
    if code == 1 and bits == 16:
        samples = np.frombuffer(payload, dtype="<i2").astype(np.float64) / 32768.0
    elif code == 3 and bits == 32:
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    else:
        raise ValueError(f"{path}: unsupported WAV layout (code={code}, bits={bits})")
    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    return samples, rate


@dataclass
class OfflineTextEncoder:
    """Deterministic per-token unit vectors keyed by the token string."""

    dim: int = 64
    name: str = "offline-hashed-text"

    def tokenize(self, prompt: str) -> list[str]:
        return simple_tokenize(prompt)

    def encode_tokens(self, tokens: list[str]) -> np.ndarray:
        return np.stack([_seeded_unit_vector(f"text:{tok}", self.dim) for tok in tokens])


@dataclass
class OfflineAudioEncoder:
    """Spectral band energies projected into the text space, deterministic."""

    dim: int = 64
    bands: int = 32
    name: str = "offline-spectral-audio"

    def encode(self, path) -> np.ndarray:
        samples, _rate = read_wav_mono(path)
        spectrum = np.abs(np.fft.rfft(samples))
        edges = np.linspace(0, spectrum.size, self.bands + 1, dtype=int)
        energies = np.array([
            float(spectrum[lo:hi].sum()) if hi > lo else 0.0
            for lo, hi in zip(edges[:-1], edges[1:])
        ])
        features = np.log1p(energies)
        if not features.any():
            features = np.ones(self.bands)  # silent clip still gets a valid direction
        rng = np.random.default_rng(
            int.from_bytes(hashlib.blake2b(self.name.encode(), digest_size=8).digest(), "little")
        )
        projection = rng.standard_normal((self.dim, self.bands))
        vec = projection @ features
        return vec / np.linalg.norm(vec)


class ClipTextEncoder:
    """CLIP text tower; token indices follow the CLIP tokenizer (BOS at 0)."""

    def __init__(self, model_id: str = "openai/clip-vit-large-patch14", device: str = "cpu"):
        try:
            from transformers import CLIPTextModel, CLIPTokenizer
        except ImportError as exc:
            raise ModelLoadError("transformers is not installed") from exc
        try:
            self.tokenizer = CLIPTokenizer.from_pretrained(model_id)
            self.model = CLIPTextModel.from_pretrained(model_id).to(device).eval()
        except Exception as exc:
            raise ModelLoadError(f"cannot load {model_id}: {exc}") from exc
        self.name = model_id
        self.device = device
        self.dim = int(self.model.config.hidden_size)

    def tokenize(self, prompt: str) -> list[str]:
        ids = self.tokenizer(prompt)["input_ids"]
        return self.tokenizer.convert_ids_to_tokens(ids)

    def encode_tokens(self, tokens: list[str]) -> np.ndarray:
        import torch

        ids = self.tokenizer.convert_tokens_to_ids(tokens)
        with torch.no_grad():
            hidden = self.model(torch.tensor([ids], device=self.device)).last_hidden_state[0]
        return hidden.cpu().numpy().astype(np.float64)


class ClapAudioEncoder:
    """CLAP audio tower producing one pooled embedding per clip."""

    def __init__(self, model_id: str = "laion/clap-htsat-unfused", device: str = "cpu"):
        try:
            from transformers import ClapModel, ClapProcessor
        except ImportError as exc:
            raise ModelLoadError("transformers is not installed") from exc
        try:
            self.processor = ClapProcessor.from_pretrained(model_id)
            self.model = ClapModel.from_pretrained(model_id).to(device).eval()
        except Exception as exc:
            raise ModelLoadError(f"cannot load {model_id}: {exc}") from exc
        self.name = model_id
        self.device = device
        self.dim = int(self.model.config.projection_dim)

    def encode(self, path) -> np.ndarray:
        import torch

        samples, rate = read_wav_mono(path)
        inputs = self.processor(audios=samples, sampling_rate=rate, return_tensors="pt")
        with torch.no_grad():
            features = self.model.get_audio_features(**{k: v.to(self.device) for k, v in inputs.items()})
        return features[0].cpu().numpy().astype(np.float64)
