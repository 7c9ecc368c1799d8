"""Adapter CLI: export embeddings, inject schedules into the reference backend."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .encoders import ClapAudioEncoder, ClipTextEncoder, OfflineAudioEncoder, OfflineTextEncoder
from .errors import AdapterError
from .export import export_embeddings, write_identity_schedule
from .inject import TinyDenoiser, default_token_embeddings, inject_schedule, load_schedule


def _build_parser():
    parser = argparse.ArgumentParser(prog="aadiff-adapter")
    sub = parser.add_subparsers(dest="command", required=True)

    p_export = sub.add_parser("export", help="export token + audio embedding files")
    p_export.add_argument("--prompt", required=True)
    p_export.add_argument("--audio", action="append", default=[], help="WAV input (repeatable)")
    p_export.add_argument("--out", required=True, help="output directory")
    p_export.add_argument("--encoders", choices=("offline", "pretrained"), default="offline")
    p_export.add_argument("--dim", type=int, default=64, help="embedding dim for offline encoders")
    p_export.add_argument("--text-model", default="openai/clip-vit-large-patch14")
    p_export.add_argument("--audio-model", default="laion/clap-htsat-unfused")
    p_export.add_argument(
        "--identity-schedule-frames", type=int, default=0,
        help="also write identity_schedule.json with this many frames",
    )

    p_inject = sub.add_parser("inject", help="run a schedule through the reference backend")
    p_inject.add_argument("--schedule", required=True)
    p_inject.add_argument("--out", required=True, help="directory for numbered PNG frames")
    p_inject.add_argument("--seed", type=int, default=0)
    p_inject.add_argument("--size", type=int, default=16)
    p_inject.add_argument("--steps", type=int, default=4)
    return parser


def cmd_export(args) -> int:
    if args.encoders == "pretrained":
        text_encoder = ClipTextEncoder(args.text_model)
        audio_encoder = ClapAudioEncoder(args.audio_model)
    else:
        text_encoder = OfflineTextEncoder(dim=args.dim)
        audio_encoder = OfflineAudioEncoder(dim=args.dim)
    manifest = export_embeddings(args.prompt, args.audio, args.out, text_encoder, audio_encoder)
    if args.identity_schedule_frames > 0:
        write_identity_schedule(
            Path(args.out) / "identity_schedule.json",
            manifest.entries,
            frame_count=args.identity_schedule_frames,
            prompt=args.prompt,
        )
    print(f"exported {len(manifest.entries)} tokens, {len(manifest.audio_embedding_paths)} audio embeddings -> {args.out}")
    return 0


def cmd_inject(args) -> int:
    schedule = load_schedule(args.schedule)
    token_count = max(schedule["tokens"], default=0) + 1
    denoiser = TinyDenoiser(size=args.size, steps=args.steps)
    embeddings = default_token_embeddings(token_count, token_dim=denoiser.token_dim)
    frames, _ = inject_schedule(args.schedule, embeddings, denoiser, seed=args.seed, out_dir=args.out)
    print(f"rendered {len(frames)} frames -> {args.out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return {"export": cmd_export, "inject": cmd_inject}[args.command](args)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
