"""Seeded synthetic corpora with planted topics and per-modality signal control."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import EmbeddingMatrix, Segment, VideoCorpus, attach, write_embeddings
from .errors import ValidationError

DEFAULT_DIMS = {"text": 48, "audio": 40, "visual": 32}


@dataclass(frozen=True)
class SynthParams:
    n_videos: int = 10
    segments_per_video: int = 60
    n_topics: int = 4
    informativeness: dict = field(
        default_factory=lambda: {"text": 1.0, "audio": 1.0, "visual": 1.0}
    )
    noise_scale: float = 0.35
    # Structured, topic-agnostic nuisance (e.g. speaker/style variation): a
    # per-segment draw among a few shared directions, scaled per modality.
    nuisance: dict = field(default_factory=dict)
    nuisance_dirs: int = 6
    dims: dict = field(default_factory=lambda: dict(DEFAULT_DIMS))
    min_run: int = 3
    max_run: int = 9
    seed: int = 0

    def __post_init__(self):
        if min(self.n_videos, self.segments_per_video, self.n_topics) < 1:
            raise ValidationError("synthetic corpus parameters must be positive")
        if not 1 <= self.min_run <= self.max_run:
            raise ValidationError("run lengths must satisfy 1 <= min_run <= max_run")


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v if n == 0 else v / n


def _topic_sequence(rng: np.random.Generator, params: SynthParams) -> np.ndarray:
    """Planted labels in contiguous runs; consecutive runs change topic."""
    labels = []
    prev = -1
    while len(labels) < params.segments_per_video:
        run = int(rng.integers(params.min_run, params.max_run + 1))
        choices = [t for t in range(params.n_topics) if t != prev] or [0]
        topic = int(rng.choice(choices))
        labels.extend([topic] * run)
        prev = topic
    return np.array(labels[: params.segments_per_video], dtype=np.intp)


def _embedding(
    rng: np.random.Generator,
    centroid: np.ndarray,
    inform: float,
    noise_scale: float,
    nuisance_dir: np.ndarray | None = None,
    nuisance_scale: float = 0.0,
) -> np.ndarray:
    noise = _unit(rng.standard_normal(centroid.shape)) * noise_scale
    structured = nuisance_scale * nuisance_dir if nuisance_dir is not None else 0.0
    return _unit(inform * centroid + structured + noise)


def _transcript(rng: np.random.Generator, topic: int, tokens_per_segment: int = 10) -> str:
    words = []
    for _ in range(tokens_per_segment):
        if rng.random() < 0.7:
            words.append(f"theme{topic}term{int(rng.integers(0, 24))}")
        else:
            words.append(f"filler{int(rng.integers(0, 30))}")
    return " ".join(words)


def generate_corpus(params: SynthParams) -> tuple[list[VideoCorpus], list[np.ndarray]]:
    """Build in-memory corpora plus the planted label vector per video.

    Per modality, a segment's embedding is the unit-normalized sum of
    informativeness * topic centroid and a noise vector of norm noise_scale;
    informativeness 0 yields pure noise. Fully reproducible from the seed.
    """
    rng = np.random.default_rng(params.seed)
    centroids = {
        m: np.stack([_unit(rng.standard_normal(d)) for _ in range(params.n_topics)])
        for m, d in params.dims.items()
    }
    nuisance_dirs = {
        m: np.stack([_unit(rng.standard_normal(d)) for _ in range(params.nuisance_dirs)])
        for m, d in params.dims.items()
    }

    corpora = []
    truths = []
    for vid in range(params.n_videos):
        labels = _topic_sequence(rng, params)
        segments = []
        t = 0.0
        for i, topic in enumerate(labels):
            dur = float(rng.uniform(4.0, 8.0))
            segments.append(
                Segment(
                    video_id=f"video_{vid:03d}",
                    index=i,
                    t_start=round(t, 3),
                    t_end=round(t + dur, 3),
                    text=_transcript(rng, int(topic)),
                )
            )
            t += dur

        corpus = VideoCorpus(video_id=f"video_{vid:03d}", segments=segments)
        for modality, d in params.dims.items():
            inform = float(params.informativeness.get(modality, 1.0))
            nscale = float(params.nuisance.get(modality, 0.0))
            rows = []
            for topic in labels:
                ndir = None
                if nscale > 0.0:
                    ndir = nuisance_dirs[modality][int(rng.integers(0, params.nuisance_dirs))]
                rows.append(
                    _embedding(rng, centroids[modality][topic], inform,
                               params.noise_scale, ndir, nscale)
                )
            attach(corpus, EmbeddingMatrix(modality=modality, data=np.stack(rows),
                                           source="synthetic"))
        corpora.append(corpus)
        truths.append(labels)
    return corpora, truths


def make_synthetic_corpus(out_dir: str | Path, params: SynthParams) -> list[Path]:
    """Write a generated corpus to disk: one directory per video with
    segments.jsonl, per-modality EMB1 files, and the planted labels."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpora, truths = generate_corpus(params)

    video_dirs = []
    for corpus, truth in zip(corpora, truths):
        vdir = out_dir / corpus.video_id
        vdir.mkdir(parents=True, exist_ok=True)
        with (vdir / "segments.jsonl").open("w", encoding="utf-8") as fh:
            for seg in corpus.segments:
                fh.write(
                    json.dumps(
                        {"start": seg.t_start, "end": seg.t_end, "text": seg.text},
                        separators=(",", ":"),
                    )
                    + "\n"
                )
        for modality in params.dims:
            write_embeddings(corpus.matrices[modality], vdir / f"{modality}.emb1")
        (vdir / "truth.json").write_text(
            json.dumps({"labels": [int(l) for l in truth]}, separators=(",", ":"))
        )
        video_dirs.append(vdir)

    meta = {
        "n_videos": params.n_videos,
        "segments_per_video": params.segments_per_video,
        "n_topics": params.n_topics,
        "informativeness": params.informativeness,
        "noise_scale": params.noise_scale,
        "nuisance": params.nuisance,
        "nuisance_dirs": params.nuisance_dirs,
        "dims": params.dims,
        "min_run": params.min_run,
        "max_run": params.max_run,
        "seed": params.seed,
    }
    (out_dir / "synth.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return video_dirs
