"""Apply a parsed edit schedule inside a cross-attention denoiser.

The reusable piece is TokenColumnScaler: it multiplies the token columns
of an attention-probability tensor by the current frame's multipliers,
which is exactly the reweighting a diffusion backend applies at every
denoising step. TinyDenoiser is a small, fully deterministic torch
backbone with one real cross-attention layer, used as the reference
backend; a production UNet wires the same scaler into its cross-attention
processors (see README for diffusers placement).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import torch

from .errors import InjectionError, ScheduleFormatError


def load_schedule(source) -> dict:
    """Read the fields of a schedule JSON file the backend needs.

    Returns {"fps", "frame_count", "prompt", "tokens", "frames"} with
    frames as a list of {int: float} maps.
    """
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source).decode("utf-8")
    else:
        raw = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScheduleFormatError(f"schedule is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != 1:
        raise ScheduleFormatError("expected a version-1 schedule object")
    try:
        frame_count = int(doc["frame_count"])
        frames = []
        for frame in doc["frames"]:
            parsed = {}
            for key, value in frame.items():
                multiplier = float(value)
                if multiplier < 0 or not math.isfinite(multiplier):
                    raise ScheduleFormatError(f"bad multiplier {value!r} for token {key}")
                parsed[int(key)] = multiplier
            frames.append(parsed)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScheduleFormatError(f"malformed schedule: {exc}") from exc
    if len(frames) != frame_count:
        raise ScheduleFormatError(
            f"frames length {len(frames)} != frame_count {frame_count}"
        )
    return {
        "fps": float(doc.get("fps", 30.0)),
        "frame_count": frame_count,
        "prompt": str(doc.get("prompt", "")),
        "tokens": {int(t["index"]): str(t["token"]) for t in doc.get("tokens", [])},
        "frames": frames,
    }


class TokenColumnScaler:
    """Scales selected token columns of attention probabilities.

    Expects tensors shaped [..., query_cells, key_tokens] (the layout of
    cross-attention probabilities in latent-diffusion UNets). Multipliers
    are set per frame and applied identically at every denoising step;
    an empty multiplier map is the identity.
    """

    def __init__(self):
        self._multipliers: dict[int, float] = {}

    def set_frame(self, multipliers: dict[int, float]) -> None:
        self._multipliers = dict(multipliers)

    def clear(self) -> None:
        self._multipliers = {}

    def __call__(self, attn_probs: torch.Tensor) -> torch.Tensor:
        if not self._multipliers:
            return attn_probs
        token_count = attn_probs.shape[-1]
        for index in self._multipliers:
            if index < 0 or index >= token_count:
                raise InjectionError(
                    f"token index {index} is beyond the prompt length {token_count}"
                )
        scale = torch.ones(token_count, dtype=attn_probs.dtype, device=attn_probs.device)
        for index, multiplier in self._multipliers.items():
            scale[index] = multiplier
        return attn_probs * scale


class TinyDenoiser(torch.nn.Module):
    """Deterministic reference backend: iterative denoising with one
    cross-attention block between latent cells and prompt tokens.

    Weight init, the base latent, and every step depend only on the
    seeds, so generation is reproducible bit for bit.
    """

    def __init__(self, token_dim: int = 16, channels: int = 8, size: int = 16,
                 steps: int = 4, weight_seed: int = 0):
        super().__init__()
        generator = torch.Generator().manual_seed(weight_seed)

        def linear(rows, cols):
            return torch.nn.Parameter(torch.randn(rows, cols, generator=generator) / math.sqrt(cols))

        self.size = size
        self.channels = channels
        self.token_dim = token_dim
        self.steps = steps
        self.to_q = linear(channels, channels)
        self.to_k = linear(channels, token_dim)
        self.to_v = linear(channels, token_dim)
        self.to_rgb = linear(3, channels)

    @torch.no_grad()
    def generate(self, token_embeddings: torch.Tensor, seed: int = 0,
                 attn_scaler: TokenColumnScaler | None = None) -> np.ndarray:
        """One frame as an H x W x 3 float array in [0, 1]."""
        if token_embeddings.ndim != 2 or token_embeddings.shape[1] != self.token_dim:
            raise InjectionError(
                f"token embeddings must be [tokens, {self.token_dim}], got {tuple(token_embeddings.shape)}"
            )
        cells = self.size * self.size
        generator = torch.Generator().manual_seed(seed)
        latent = torch.randn(cells, self.channels, generator=generator)

        keys = token_embeddings @ self.to_k.T      # [tokens, channels]
        values = token_embeddings @ self.to_v.T    # [tokens, channels]
        for _ in range(self.steps):
            queries = latent @ self.to_q.T                     # [cells, channels]
            logits = queries @ keys.T / math.sqrt(self.channels)
            attn = torch.softmax(logits, dim=-1)               # [cells, tokens]
            if attn_scaler is not None:
                attn = attn_scaler(attn)
            latent = latent + attn @ values
        rgb = torch.sigmoid(latent @ self.to_rgb.T)            # [cells, 3]
        return rgb.reshape(self.size, self.size, 3).numpy().astype(np.float64)


def default_token_embeddings(token_count: int, token_dim: int = 16, seed: int = 1234) -> torch.Tensor:
    generator = torch.Generator().manual_seed(seed)
    return torch.randn(token_count, token_dim, generator=generator)


def write_png(frame: np.ndarray, path) -> None:
    from PIL import Image

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    levels = np.floor(np.clip(frame, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(levels, mode="RGB").save(path, format="PNG")


def inject_schedule(schedule_source, token_embeddings: torch.Tensor, denoiser: TinyDenoiser,
                    seed: int = 0, out_dir=None, scorer=None):
    """Run the backend once per frame with that frame's multipliers.

    Every frame starts from the same seeded base latent; only the
    attention multipliers differ, applied at every denoising step. Token
    indices beyond the prompt length abort with a diagnostic. Returns
    (frames, scores) where scores is None unless a scorer is given.
    """
    schedule = load_schedule(schedule_source)
    token_count = token_embeddings.shape[0]
    for t, frame_map in enumerate(schedule["frames"]):
        for index in frame_map:
            if index >= token_count:
                raise InjectionError(
                    f"frame {t}: token index {index} is beyond the prompt length {token_count}"
                )

    scaler = TokenColumnScaler()
    frames = []
    scores = [] if scorer is not None else None
    for t, frame_map in enumerate(schedule["frames"]):
        scaler.set_frame(frame_map)
        frame = denoiser.generate(token_embeddings, seed=seed, attn_scaler=scaler)
        frames.append(frame)
        if scorer is not None:
            scores.append(float(scorer(frame, schedule["prompt"])))
        if out_dir is not None:
            write_png(frame, Path(out_dir) / f"frame_{t:05d}.png")
    return frames, scores


class ClipScorer:
    """Real CLIP image-text similarity per frame, for synchronization curves (needs weights)."""

    def __init__(self, model_id: str = "openai/clip-vit-large-patch14", device: str = "cpu"):
        try:
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            from .errors import ModelLoadError

            raise ModelLoadError("transformers is not installed") from exc
        try:
            self.processor = CLIPProcessor.from_pretrained(model_id)
            self.model = CLIPModel.from_pretrained(model_id).to(device).eval()
        except Exception as exc:
            from .errors import ModelLoadError

            raise ModelLoadError(f"cannot load {model_id}: {exc}") from exc
        self.device = device

    def __call__(self, frame: np.ndarray, prompt: str) -> float:
        image = np.floor(np.clip(frame, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
        inputs = self.processor(text=[prompt], images=[image], return_tensors="pt", padding=True)
        with torch.no_grad():
            out = self.model(**{k: v.to(self.device) for k, v in inputs.items()})
        return float(out.logits_per_image[0, 0])
