#!/usr/bin/env python3
"""Write a small synthetic corpus plus a ready-to-run config, then execute it.

Usage:
    python scripts/make_demo_run.py --out demo
    cat demo/out/metrics.json
"""

import argparse
from pathlib import Path

from tritopic.pipeline import load_config, run
from tritopic.synth import SynthParams, make_synthetic_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mode", default="full",
                        choices=["text_only", "text_audio", "text_visual", "full"])
    args = parser.parse_args()

    base = Path(args.out)
    make_synthetic_corpus(
        base / "corpus",
        SynthParams(n_videos=3, segments_per_video=50, n_topics=4, seed=args.seed,
                    informativeness={"text": 0.5, "audio": 0.7, "visual": 1.0}),
    )
    config_path = base / "run.yaml"
    config_path.write_text(
        f"corpus_dir: corpus\nmode: {args.mode}\noutput_dir: out\n"
        "diagnostics: {enabled: true}\n"
    )
    result = run(load_config(config_path))
    for video in result.per_video:
        status = "ok" if video.error is None else f"FAILED: {video.error}"
        print(f"{video.video_id}: {status}")
    print(f"outputs under {base / 'out'}")


if __name__ == "__main__":
    main()
