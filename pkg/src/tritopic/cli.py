"""Command-line entry points: run, synth, metrics."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .corpus import load_embeddings
from .errors import TritopicError
from .metrics import cluster_validity, iec
from .pipeline import load_config, run
from .synth import SynthParams, make_synthetic_corpus


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.mode:
        config.mode = args.mode
    if args.out:
        config.output_dir = Path(args.out)
    if args.workers:
        config.workers = args.workers
    result = run(config)
    for video in result.per_video:
        status = "ok" if video.error is None else f"FAILED ({video.error})"
        print(f"{video.video_id}: {status}")
    print(f"report: {config.output_dir / 'metrics.json'}")
    return 0 if result.all_succeeded else 1


def _parse_inform(spec: str) -> dict[str, float]:
    out = {}
    for part in spec.split(","):
        key, _, value = part.partition("=")
        if key.strip() not in ("text", "audio", "visual"):
            raise SystemExit(f"bad --inform entry {part!r}")
        out[key.strip()] = float(value)
    return out


def _cmd_synth(args: argparse.Namespace) -> int:
    params = SynthParams(
        n_videos=args.videos,
        segments_per_video=args.segments,
        n_topics=args.topics,
        informativeness=_parse_inform(args.inform),
        noise_scale=args.noise,
        seed=args.seed,
    )
    dirs = make_synthetic_corpus(args.out, params)
    print(f"wrote {len(dirs)} videos under {args.out}")
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    doc = json.loads(Path(args.labels).read_text(encoding="utf-8"))
    labels = np.asarray(doc["labels"] if isinstance(doc, dict) else doc, dtype=np.intp)
    matrix = load_embeddings(args.embeddings, expected_rows=len(labels), modality=args.space)
    validity = cluster_validity(matrix.data, labels, space=args.space)
    report = {
        "space": args.space,
        "validity": None if validity is None else {
            "ch": validity.ch,
            "silhouette": validity.silhouette,
            "db": validity.db,
            "degenerate": validity.degenerate,
        },
        "iec": iec(matrix.data, labels),
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tritopic",
                                     description="Multimodal topic discovery for video")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured pipeline run")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--mode", choices=["text_only", "text_audio", "text_visual", "full"])
    p_run.add_argument("--out")
    p_run.add_argument("--workers", type=int)
    p_run.set_defaults(func=_cmd_run)

    p_synth = sub.add_parser("synth", help="write a seeded synthetic corpus")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--videos", type=int, default=10)
    p_synth.add_argument("--segments", type=int, default=60)
    p_synth.add_argument("--topics", type=int, default=4)
    p_synth.add_argument("--inform", default="text=1,audio=1,visual=1",
                         help="per-modality informativeness, e.g. text=0.3,audio=0.7,visual=1")
    p_synth.add_argument("--noise", type=float, default=0.35)
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=_cmd_synth)

    p_metrics = sub.add_parser("metrics", help="cluster validity for labels + embeddings")
    p_metrics.add_argument("--labels", required=True, help="JSON file with a labels array")
    p_metrics.add_argument("--embeddings", required=True, help="EMB1 matrix file")
    p_metrics.add_argument("--space", default="fused",
                           choices=["text", "audio", "visual", "fused"])
    p_metrics.set_defaults(func=_cmd_metrics)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TritopicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
