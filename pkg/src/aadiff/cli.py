"""Command-line driver: audio in, envelopes / schedules / rendered frames out.

Subcommands:
    envelope   per-frame magnitude, raw and smoothed, as CSV + figure
    schedule   compile audio + embeddings into a schedule JSON
    render     drive the mock synthesizer from a schedule, emit PPM frames
    ablate     sweep window sizes and report total-variation columns

Flag values override the JSON --config file, which overrides defaults.
Exit codes: 1 usage, 2 input format, 3 validation. Output files are
written atomically; every run is deterministic for fixed inputs (the env
var AADIFF_SEED is reserved and currently unused).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .audio import decode_wav, make_frame_grid
from .envelope import (
    Envelope,
    GainConfig,
    SmoothingConfig,
    compute_envelope,
    smooth,
    to_multipliers,
    total_variation,
    write_envelope_csv,
)
from .errors import (
    AadiffError,
    ConfigError,
    DecodeError,
    DegenerateEmbedding,
    DegenerateSeries,
    EmptyAudio,
    FormatError,
    UnsupportedFormat,
)
from .ioutil import atomic_write_bytes
from .matching import load_audio_embedding_file, load_embeddings_file, top_k_tokens
from .mocksynth import (
    EffectSpec,
    MetricSeries,
    emit_plot_data,
    make_gaussian_attention,
    pearson,
    proxy_score,
    read_ppm,
    render_video,
    solid_image,
    write_ppm,
)
from .plotting import save_ablation_plot, save_series_plot
from .schedule import EditSchedule, EditSource, build_schedule, parse, serialize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_VALIDATION = 3

_FORMAT_ERRORS = (DecodeError, UnsupportedFormat, EmptyAudio, FormatError, DegenerateEmbedding)

# effect colors cycled over scheduled tokens when the user gives none
_PALETTE = (
    (1.00, 0.62, 0.12),
    (0.25, 0.45, 1.00),
    (0.96, 0.96, 1.00),
    (0.30, 0.85, 0.40),
    (0.80, 0.30, 0.90),
    (1.00, 0.30, 0.25),
)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Merged run settings: defaults < config file < explicit flags."""

    audio: list = field(default_factory=list)
    embeddings: str = ""
    audio_embeddings: list = field(default_factory=list)
    fps: float = 30.0
    window: int = 75
    mode: str = "centered"
    metric: str = "rms"
    k: int = 1
    gain: float = 1.0
    floor: float = 0.0
    normalization: str = "max"
    out: str = "out"
    prompt: str = ""
    source_weights: list = field(default_factory=list)
    windows: list = field(default_factory=lambda: [1, 75, 150])
    schedule: str = ""
    base: str = ""
    effects: list = field(default_factory=list)
    size: str = "64x64"


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the contract wants 1
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="aadiff", description="Audio-synchronized attention edit schedules.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, audio=False, embeddings=False):
        if audio:
            p.add_argument("--audio", action="append", help="WAV input (repeatable)")
        if embeddings:
            p.add_argument("--embeddings", help="token embedding JSON file")
            p.add_argument(
                "--audio-embedding", dest="audio_embeddings", action="append",
                help="audio embedding JSON, one per --audio, paired in order",
            )
        p.add_argument("--fps", type=float, help="video frames per second (default 30)")
        p.add_argument("--window", type=int, help="smoothing window size in frames (default 75)")
        p.add_argument("--mode", choices=("centered", "causal"), help="window alignment")
        p.add_argument("--metric", choices=("rms", "peak"), help="per-frame magnitude metric")
        p.add_argument("--k", type=int, help="number of tokens to match per audio (default 1)")
        p.add_argument("--gain", type=float, help="multiplier at envelope peak (default 1.0)")
        p.add_argument("--floor", type=float, help="minimum multiplier (default 0.0)")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--config", help="JSON config file; flags override it")

    p_env = sub.add_parser("envelope", help="extract and smooth the per-frame envelope")
    common(p_env, audio=True)

    p_sched = sub.add_parser("schedule", help="compile audio + embeddings into a schedule")
    common(p_sched, audio=True, embeddings=True)
    p_sched.add_argument("--prompt", help="prompt text recorded in the schedule")

    p_render = sub.add_parser("render", help="render a schedule with the mock synthesizer")
    common(p_render)
    p_render.add_argument("--schedule", help="schedule JSON file")
    p_render.add_argument("--base", help="base image (P6 PPM); default solid gray")
    p_render.add_argument(
        "--effect", dest="effects", action="append",
        help="effect as IDX:R,G,B or IDX:R,G,B:CY,CX,SIGMA (repeatable)",
    )
    p_render.add_argument("--size", help="base image size WxH when no --base (default 64x64)")

    p_ablate = sub.add_parser("ablate", help="sweep smoothing windows, report total variation")
    common(p_ablate, audio=True)
    p_ablate.add_argument("--windows", help="comma-separated window sizes (default 1,75,150)")
    p_ablate.add_argument("--size", help="render size WxH for the proxy pass (default 64x64)")

    return parser


_CONFIG_LIST_KEYS = {"audio", "audio_embeddings", "effects", "windows", "source_weights"}


def _load_config_file(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(doc) - known
    if unknown:
        raise UsageError(f"unknown config key(s): {sorted(unknown)}")
    for key in _CONFIG_LIST_KEYS & set(doc):
        if not isinstance(doc[key], list):
            doc[key] = [doc[key]]
    return doc


def _merge_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        for key, value in _load_config_file(args.config).items():
            setattr(cfg, key, value)
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    return cfg


def _parse_size(size: str) -> tuple[int, int]:
    try:
        w_txt, h_txt = size.lower().split("x")
        width, height = int(w_txt), int(h_txt)
    except ValueError:
        raise UsageError(f"--size must look like 64x64, got {size!r}") from None
    if width < 1 or height < 1:
        raise UsageError("--size dimensions must be positive")
    return width, height


def _parse_windows(windows) -> list[int]:
    if isinstance(windows, str):
        parts = [p for p in windows.split(",") if p.strip()]
    else:
        parts = windows
    try:
        sizes = [int(p) for p in parts]
    except (TypeError, ValueError):
        raise UsageError(f"--windows must be comma-separated integers, got {windows!r}") from None
    if not sizes:
        raise UsageError("--windows must name at least one window size")
    return sizes


def _parse_effect_flag(text: str) -> dict:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"--effect must be IDX:R,G,B or IDX:R,G,B:CY,CX,SIGMA, got {text!r}")
    try:
        index = int(parts[0])
        color = [float(c) for c in parts[1].split(",")]
        spec = {"index": index, "color": color}
        if len(parts) == 3:
            cy, cx, sigma = (float(v) for v in parts[2].split(","))
            spec["center"] = [cy, cx]
            spec["sigma"] = sigma
    except ValueError:
        raise UsageError(f"cannot parse --effect {text!r}") from None
    return spec


def _read_file(path) -> bytes:
    return Path(path).read_bytes()


def _decode_audio(path):
    return replace(decode_wav(_read_file(path)), source_label=str(path))


def _effect_from_spec(spec: dict, height: int, width: int) -> EffectSpec:
    if not isinstance(spec, dict) or "index" not in spec or "color" not in spec:
        raise ConfigError(f"effect entries need 'index' and 'color', got {spec!r}")
    center = tuple(spec.get("center", (0.5, 0.5)))
    sigma = float(spec.get("sigma", 0.22))
    return EffectSpec(
        token_index=int(spec["index"]),
        effect_color=np.asarray(spec["color"], dtype=np.float64),
        attention=make_gaussian_attention(height, width, center=center, sigma=sigma),
    )


def _default_effects(token_indices, height, width) -> list[EffectSpec]:
    """Deterministic effects for scheduled tokens the user did not configure:
    palette colors on blobs spread across the image."""
    indices = sorted(token_indices)
    count = len(indices)
    effects = []
    for j, index in enumerate(indices):
        center = (0.5, (j + 1) / (count + 1))
        effects.append(
            EffectSpec(
                token_index=index,
                effect_color=np.asarray(_PALETTE[j % len(_PALETTE)], dtype=np.float64),
                attention=make_gaussian_attention(height, width, center=center, sigma=0.22),
            )
        )
    return effects


def _require_single_audio(cfg: RunConfig) -> str:
    if len(cfg.audio) != 1:
        raise UsageError("this subcommand takes exactly one --audio input")
    return cfg.audio[0]


def cmd_envelope(cfg: RunConfig) -> int:
    clip = _decode_audio(_require_single_audio(cfg))
    grid = make_frame_grid(clip, cfg.fps)
    raw = compute_envelope(clip, grid, metric=cfg.metric)
    smoothed = smooth(raw, SmoothingConfig(window_size_s=cfg.window, mode=cfg.mode))

    out_dir = Path(cfg.out)
    write_envelope_csv(out_dir / "envelope.csv", {"raw": raw, "smoothed": smoothed})
    save_series_plot(
        [MetricSeries(raw.values, "raw"), MetricSeries(smoothed.values, "smoothed")],
        out_dir / "envelope.png",
        title=f"envelope ({cfg.metric}, window {cfg.window} {cfg.mode})",
        ylabel="magnitude",
    )
    print(f"{grid.frame_count} frames")
    return EXIT_OK


def _build_sources(cfg: RunConfig):
    if not cfg.audio:
        raise UsageError("schedule needs at least one --audio input")
    if not cfg.embeddings:
        raise UsageError("schedule needs --embeddings")
    if len(cfg.audio_embeddings) != len(cfg.audio):
        raise UsageError("need exactly one --audio-embedding per --audio, in order")
    weights = cfg.source_weights or [1.0] * len(cfg.audio)
    if len(weights) != len(cfg.audio):
        raise UsageError("source_weights must pair one-to-one with audio inputs")

    tokens = load_embeddings_file(cfg.embeddings)
    gain_cfg = GainConfig(gain=cfg.gain, floor=cfg.floor, normalization=cfg.normalization)
    smoothing = SmoothingConfig(window_size_s=cfg.window, mode=cfg.mode)

    sources = []
    frame_count = None
    for audio_path, embedding_path, weight in zip(cfg.audio, cfg.audio_embeddings, weights):
        clip = _decode_audio(audio_path)
        grid = make_frame_grid(clip, cfg.fps)
        if frame_count is None:
            frame_count = grid.frame_count
        raw = compute_envelope(clip, grid, metric=cfg.metric)
        multipliers = to_multipliers(smooth(raw, smoothing), gain_cfg)
        audio_embedding = load_audio_embedding_file(embedding_path)
        match = top_k_tokens(audio_embedding, tokens, k=cfg.k)
        sources.append(
            EditSource(
                audio_label=str(audio_path),
                match=match,
                multipliers=multipliers,
                weight=float(weight),
            )
        )
    return sources, frame_count


def cmd_schedule(cfg: RunConfig) -> int:
    sources, frame_count = _build_sources(cfg)
    schedule = build_schedule(sources, fps=cfg.fps, frame_count=frame_count, prompt=cfg.prompt)

    out_dir = Path(cfg.out)
    atomic_write_bytes(out_dir / "schedule.json", serialize(schedule))

    series = [
        MetricSeries(
            np.array([frame.get(index, 0.0) for frame in schedule.frames]),
            f"token_{index}",
        )
        for index, _tok in schedule.tokens
    ]
    emit_plot_data(series, out_dir / "multipliers.csv")
    save_series_plot(series, out_dir / "multipliers.png", title="attention multipliers", ylabel="multiplier")
    return EXIT_OK


def _load_base_image(cfg: RunConfig):
    if cfg.base:
        return read_ppm(_read_file(cfg.base))
    width, height = _parse_size(cfg.size)
    return solid_image(height, width, color=(0.35, 0.35, 0.35))


def _resolve_effects(cfg: RunConfig, schedule: EditSchedule, height: int, width: int):
    explicit = []
    for item in cfg.effects:
        spec = _parse_effect_flag(item) if isinstance(item, str) else item
        explicit.append(_effect_from_spec(spec, height, width))
    scheduled = {index for frame in schedule.frames for index in frame}
    covered = {effect.token_index for effect in explicit}
    defaults = _default_effects(scheduled - covered, height, width)
    return explicit + defaults


def cmd_render(cfg: RunConfig) -> int:
    if not cfg.schedule:
        raise UsageError("render needs --schedule")
    schedule = parse(_read_file(cfg.schedule))
    base = _load_base_image(cfg)
    effects = _resolve_effects(cfg, schedule, base.height, base.width)

    frames = render_video(base, effects, schedule)

    out_dir = Path(cfg.out)
    for t, frame in enumerate(frames):
        write_ppm(frame, out_dir / "frames" / f"frame_{t:05d}.ppm")

    token_names = dict(schedule.tokens)
    scheduled = sorted({index for frame in schedule.frames for index in frame})
    by_token = {effect.token_index: effect for effect in effects}
    series = []
    report_lines = []
    for index in scheduled:
        multipliers = np.array([frame.get(index, 0.0) for frame in schedule.frames])
        proxies = np.array([proxy_score(frame, by_token[index]) for frame in frames])
        mult_series = MetricSeries(multipliers, f"multiplier_{index}")
        proxy_series = MetricSeries(proxies, f"proxy_{index}")
        series.extend([mult_series, proxy_series])
        label = token_names.get(index, "?")
        try:
            r = pearson(mult_series, proxy_series)
            report_lines.append(f"token {index} ({label}): r={r:.6f}")
        except DegenerateSeries:
            report_lines.append(f"token {index} ({label}): r=undefined (constant series)")

    if series:
        emit_plot_data(series, out_dir / "metrics.csv")
        save_series_plot(series, out_dir / "metrics.png", title="multiplier vs proxy score")
    for line in report_lines:
        print(line)
    return EXIT_OK


def cmd_ablate(cfg: RunConfig) -> int:
    clip = _decode_audio(_require_single_audio(cfg))
    grid = make_frame_grid(clip, cfg.fps)
    raw = compute_envelope(clip, grid, metric=cfg.metric)
    windows = _parse_windows(cfg.windows)
    gain_cfg = GainConfig(gain=cfg.gain, floor=cfg.floor, normalization=cfg.normalization)

    width, height = _parse_size(cfg.size)
    base = solid_image(height, width, color=(0.35, 0.35, 0.35))
    effect = EffectSpec(
        token_index=0,
        effect_color=np.asarray(_PALETTE[2], dtype=np.float64),
        attention=make_gaussian_attention(height, width, center=(0.5, 0.5), sigma=0.22),
    )

    tv_env_column = []
    tv_proxy_column = []
    for s in windows:
        smoothed = smooth(raw, SmoothingConfig(window_size_s=s, mode=cfg.mode))
        multipliers = to_multipliers(smoothed, gain_cfg)
        sweep_schedule = EditSchedule(
            fps=grid.fps,
            frame_count=grid.frame_count,
            prompt="",
            tokens=((0, "ablation"),),
            frames=tuple({0: float(m)} for m in multipliers.values),
        )
        frames = render_video(base, [effect], sweep_schedule)
        proxies = Envelope(
            np.array([proxy_score(frame, effect) for frame in frames]), fps=grid.fps, kind="raw"
        )
        tv_env_column.append(total_variation(smoothed))
        tv_proxy_column.append(total_variation(proxies))

    out_dir = Path(cfg.out)
    rows = ["window,tv_envelope,tv_proxy"]
    for s, tv_env, tv_proxy in zip(windows, tv_env_column, tv_proxy_column):
        rows.append(f"{s},{tv_env!r},{tv_proxy!r}")
    atomic_write_bytes(out_dir / "ablation.csv", ("\n".join(rows) + "\n").encode("utf-8"))
    save_ablation_plot(
        windows,
        {"tv_envelope": tv_env_column, "tv_proxy": tv_proxy_column},
        out_dir / "ablation.png",
        title="window size vs total variation",
    )
    return EXIT_OK


_HANDLERS = {
    "envelope": cmd_envelope,
    "schedule": cmd_schedule,
    "render": cmd_render,
    "ablate": cmd_ablate,
}


def _fail(message: str, code: int) -> int:
    print(f"error: {' '.join(str(message).split())}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _merge_config(args)
        return _HANDLERS[args.command](cfg)
    except UsageError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except _FORMAT_ERRORS as exc:
        return _fail(str(exc), EXIT_FORMAT)
    except AadiffError as exc:
        return _fail(str(exc), EXIT_VALIDATION)
    except OSError as exc:
        return _fail(str(exc), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
