"""End-to-end orchestration: config, per-video runs, reports, and the run manifest."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .client import fetch_embeddings
from .cluster import (
    ClusterParams,
    SeedTopic,
    TopicModel,
    assign_topics_detailed,
    seed_centroids_from_words,
)
from .corpus import (
    EmbeddingMatrix,
    VideoCorpus,
    attach,
    load_embeddings,
    load_segments,
    write_embeddings,
)
from .diagnostics import speaker_style_labels
from .errors import ConfigError, TritopicError
from .frames import (
    FrameCandidate,
    SelectionParams,
    center_preference,
    describe_frame,
    normalize_sharpness,
    pool_visual,
    rank_and_select,
)
from .fusion import MODES, FusionWeights
from .metrics import (
    METRIC_DEFINITIONS,
    aggregate,
    cluster_validity,
    iec,
    load_word_vectors,
    npmi,
    structure_metrics,
    topic_diversity,
    we_alignment,
)

log = logging.getLogger(__name__)

_MODE_MODALITIES = {
    "text_only": ("text",),
    "text_audio": ("text", "audio"),
    "text_visual": ("text", "visual"),
    "full": ("text", "audio", "visual"),
}

_TOP_KEYS = {
    "mode", "output_dir", "workers", "corpus_dir", "videos", "endpoints",
    "word_vectors", "seeds", "stopwords", "fusion", "selection", "cluster",
    "diagnostics", "summary", "metrics",
}
_VIDEO_KEYS = {"id", "segments", "embeddings", "frames_manifest", "media"}


@dataclass
class VideoInputs:
    video_id: str
    segments_path: Path
    embedding_paths: dict[str, Path] = field(default_factory=dict)
    frames_manifest: Path | None = None
    media: Path | None = None


@dataclass
class PipelineConfig:
    videos: list[VideoInputs]
    mode: str = "full"
    output_dir: Path = Path("out")
    workers: int = 1
    endpoints: dict[str, str] = field(default_factory=dict)
    word_vectors: Path | None = None
    seeds_path: Path | None = None
    stopwords_path: Path | None = None
    fusion: FusionWeights = field(default_factory=FusionWeights)
    selection: SelectionParams = field(default_factory=SelectionParams)
    cluster: ClusterParams = field(default_factory=ClusterParams)
    diagnostics_enabled: bool = False
    diagnostics_cluster: ClusterParams = field(default_factory=ClusterParams)
    summary_k_max: int = 4
    exclude_outlier_pairs: bool = False
    raw: dict = field(default_factory=dict)

    def required_modalities(self) -> tuple[str, ...]:
        mods = set(_MODE_MODALITIES[self.mode])
        if self.diagnostics_enabled:
            mods.add("audio")
        return tuple(sorted(mods))


@dataclass
class VideoResult:
    video_id: str
    model: TopicModel | None
    report: dict | None
    error: str | None = None
    elapsed: float = 0.0


@dataclass
class RunResult:
    per_video: list[VideoResult]
    report: dict
    manifest: dict

    @property
    def all_succeeded(self) -> bool:
        return all(v.error is None for v in self.per_video)


def _reject_unknown(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _build_params(cls, section: dict, where: str):
    fields = {f for f in cls.__dataclass_fields__}
    _reject_unknown(section, fields, where)
    return cls(**section)


def load_config(path: str | Path) -> PipelineConfig:
    """Parse and validate a YAML run configuration; unknown keys fail fast."""
    path = Path(path)
    raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config root must be a mapping")
    _reject_unknown(raw, _TOP_KEYS, str(path))
    base = path.parent

    mode = raw.get("mode", "full")
    if mode not in MODES:
        raise ConfigError(f"{path}: unknown mode {mode!r}")

    videos = _resolve_videos(raw, base, path)
    if not videos:
        raise ConfigError(f"{path}: no videos configured")

    endpoints = dict(raw.get("endpoints") or {})
    _reject_unknown(endpoints, {"text", "audio", "visual"}, "endpoints")

    diagnostics = dict(raw.get("diagnostics") or {})
    diag_enabled = bool(diagnostics.pop("enabled", False))
    metrics_section = dict(raw.get("metrics") or {})
    _reject_unknown(metrics_section, {"exclude_outlier_pairs"}, "metrics")
    summary = dict(raw.get("summary") or {})
    _reject_unknown(summary, {"k_max"}, "summary")

    config = PipelineConfig(
        videos=videos,
        mode=mode,
        output_dir=base / raw.get("output_dir", "out"),
        workers=int(raw.get("workers", 1)),
        endpoints=endpoints,
        word_vectors=_opt_path(raw.get("word_vectors"), base),
        seeds_path=_opt_path(raw.get("seeds"), base),
        stopwords_path=_opt_path(raw.get("stopwords"), base),
        fusion=_build_params(FusionWeights, dict(raw.get("fusion") or {}), "fusion"),
        selection=_build_params(SelectionParams, dict(raw.get("selection") or {}), "selection"),
        cluster=_build_params(ClusterParams, dict(raw.get("cluster") or {}), "cluster"),
        diagnostics_enabled=diag_enabled,
        diagnostics_cluster=_build_params(ClusterParams, diagnostics, "diagnostics"),
        summary_k_max=int(summary.get("k_max", 4)),
        exclude_outlier_pairs=bool(metrics_section.get("exclude_outlier_pairs", False)),
        raw=raw,
    )
    _validate_sources(config)
    return config


def _opt_path(value, base: Path) -> Path | None:
    return (base / value) if value else None


def _resolve_videos(raw: dict, base: Path, path: Path) -> list[VideoInputs]:
    if ("corpus_dir" in raw) == ("videos" in raw):
        raise ConfigError(f"{path}: configure exactly one of corpus_dir / videos")
    videos = []
    if "corpus_dir" in raw:
        corpus_dir = base / raw["corpus_dir"]
        for vdir in sorted(p for p in corpus_dir.iterdir() if p.is_dir()):
            if not (vdir / "segments.jsonl").exists():
                continue
            emb = {
                m: vdir / f"{m}.emb1"
                for m in ("text", "audio", "visual")
                if (vdir / f"{m}.emb1").exists()
            }
            videos.append(
                VideoInputs(video_id=vdir.name, segments_path=vdir / "segments.jsonl",
                            embedding_paths=emb)
            )
        return videos

    for entry in raw["videos"]:
        _reject_unknown(entry, _VIDEO_KEYS, "videos[]")
        emb = {m: base / p for m, p in (entry.get("embeddings") or {}).items()}
        _reject_unknown(set(emb), {"text", "audio", "visual"}, "videos[].embeddings")
        videos.append(
            VideoInputs(
                video_id=str(entry["id"]),
                segments_path=base / entry["segments"],
                embedding_paths=emb,
                frames_manifest=_opt_path(entry.get("frames_manifest"), base),
                media=_opt_path(entry.get("media"), base),
            )
        )
    return videos


def _validate_sources(config: PipelineConfig) -> None:
    for video in config.videos:
        for modality in config.required_modalities():
            has_file = modality in video.embedding_paths
            has_endpoint = modality in config.endpoints
            if has_file and has_endpoint:
                raise ConfigError(
                    f"{video.video_id}: modality {modality!r} has both a file and an endpoint"
                )
            if not has_file and not has_endpoint:
                raise ConfigError(
                    f"{video.video_id}: mode {config.mode!r} needs modality {modality!r} "
                    "from a file or an endpoint"
                )
            if modality == "visual" and has_endpoint and video.frames_manifest is None:
                raise ConfigError(
                    f"{video.video_id}: a visual endpoint needs a frames_manifest"
                )


def _load_seeds(config: PipelineConfig) -> list[SeedTopic] | None:
    if config.seeds_path is None:
        return None
    raw = yaml.safe_load(config.seeds_path.read_text(encoding="utf-8"))
    entries = raw.get("seeds") if isinstance(raw, dict) else raw
    seeds = [
        SeedTopic(
            name=str(e["name"]),
            words=[str(w) for w in e["words"]],
            centroid=np.asarray(e["centroid"], dtype=np.float64) if "centroid" in e else None,
        )
        for e in entries
    ]
    if any(s.centroid is None for s in seeds):
        if config.word_vectors is None:
            raise ConfigError(
                "seed topics lack centroids and no word-vector table is configured"
            )
        seeds = seed_centroids_from_words(seeds, load_word_vectors(config.word_vectors))
    return seeds


def _load_stopwords(config: PipelineConfig) -> frozenset[str]:
    if config.stopwords_path is None:
        return frozenset()
    words = config.stopwords_path.read_text(encoding="utf-8").split()
    return frozenset(w.lower() for w in words)


def _select_frames(video: VideoInputs, config: PipelineConfig, segments):
    """Run per-segment frame selection over the manifest; returns
    (report rows, selected paths per segment index)."""
    from PIL import Image

    by_segment: dict[int, list[dict]] = {}
    with video.frames_manifest.open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            by_segment.setdefault(int(row["segment_index"]), []).append(row)

    spans = {seg.index: (seg.t_start, seg.t_end) for seg in segments}
    report: list[dict] = []
    selected_paths: dict[int, list[str]] = {}
    base = video.frames_manifest.parent
    for seg_index in sorted(by_segment):
        rows = sorted(by_segment[seg_index], key=lambda r: float(r["timestamp"]))
        candidates = []
        for row in rows:
            image = np.asarray(Image.open(base / row["path"]).convert("RGB"))
            feature, sharp = describe_frame(image)
            candidates.append(
                FrameCandidate(timestamp=float(row["timestamp"]), feature=feature,
                               sharpness_raw=sharp)
            )
        candidates = normalize_sharpness(candidates)
        if seg_index in spans:
            t_start, t_end = spans[seg_index]
        else:
            t_start = min(c.timestamp for c in candidates)
            t_end = max(c.timestamp for c in candidates)
        if t_end <= t_start:
            t_end = t_start + 1e-3
        picks = rank_and_select(candidates, t_start, t_end, config.selection)
        selected_paths[seg_index] = [rows[i]["path"] for i in picks]
        for rank, i in enumerate(picks):
            c = candidates[i]
            relevance = (
                config.selection.center_weight * center_preference(c.timestamp, t_start, t_end)
                + config.selection.sharpness_weight * c.sharpness_norm
            )
            report.append(
                {
                    "video_id": video.video_id,
                    "segment_index": seg_index,
                    "timestamp": c.timestamp,
                    "path": rows[i]["path"],
                    "rank": rank,
                    "score": relevance,
                }
            )
    return report, selected_paths


def _fetch_modality(video: VideoInputs, modality: str, corpus: VideoCorpus,
                    config: PipelineConfig,
                    selected_paths: dict[int, list[str]] | None) -> EmbeddingMatrix:
    n = len(corpus.segments)
    endpoint = config.endpoints[modality]
    if modality == "text":
        payload = {"modality": "text", "items": [s.text for s in corpus.segments]}
        return fetch_embeddings(endpoint, payload, expected_rows=n)
    if modality == "audio":
        items = [
            {"file": str(video.media) if video.media else "", "start": s.t_start, "end": s.t_end}
            for s in corpus.segments
        ]
        return fetch_embeddings(endpoint, {"modality": "audio", "items": items}, expected_rows=n)

    # visual: embed the selected frames, then mean-pool per segment
    paths: list[str] = []
    spans: list[tuple[int, int]] = []
    for seg in corpus.segments:
        chosen = (selected_paths or {}).get(seg.index, [])
        spans.append((len(paths), len(paths) + len(chosen)))
        paths.extend(chosen)
    frame_matrix = fetch_embeddings(
        endpoint, {"modality": "visual", "items": paths}, expected_rows=len(paths)
    )
    dims = frame_matrix.dims
    pooled = np.zeros((n, dims), dtype=np.float64)
    for i, (a, b) in enumerate(spans):
        pooled[i] = pool_visual(frame_matrix.data[a:b])
    return EmbeddingMatrix(modality="visual", data=pooled, source=frame_matrix.source)


def _run_video(video: VideoInputs, config: PipelineConfig,
               seeds: list[SeedTopic] | None, stopwords: frozenset[str],
               word_vectors: dict | None) -> VideoResult:
    from .summarize import summarize_topic

    segments = load_segments(video.segments_path, video_id=video.video_id)
    corpus = VideoCorpus(video_id=video.video_id, segments=segments)

    frame_report: list[dict] = []
    selected_paths: dict[int, list[str]] | None = None
    if video.frames_manifest is not None:
        frame_report, selected_paths = _select_frames(video, config, segments)

    for modality in config.required_modalities():
        if modality in video.embedding_paths:
            matrix = load_embeddings(
                video.embedding_paths[modality], expected_rows=len(segments), modality=modality
            )
        else:
            matrix = _fetch_modality(video, modality, corpus, config, selected_paths)
        attach(corpus, matrix)

    model, space, gates = assign_topics_detailed(
        corpus, config.cluster, mode=config.mode, seeds=seeds,
        weights=config.fusion, stopwords=stopwords,
    )

    summaries = {
        cid: summarize_topic(
            cid,
            [seg for seg, lab in zip(segments, model.labels) if lab == cid],
            k_max=config.summary_k_max,
            stopwords=stopwords,
        )
        for cid in model.topics
    }

    speakers = None
    if config.diagnostics_enabled:
        speakers = speaker_style_labels(corpus, config.diagnostics_cluster)

    report = _video_report(corpus, model, space, config, word_vectors)
    _write_video_outputs(
        video, config, corpus, model, space, gates, summaries, speakers,
        frame_report, selected_paths,
    )
    return VideoResult(video_id=video.video_id, model=model, report=report)


def _video_report(corpus: VideoCorpus, model: TopicModel, space: EmbeddingMatrix,
                  config: PipelineConfig, word_vectors: dict | None) -> dict:
    diag: dict = {}
    structure = structure_metrics(
        model.labels, exclude_outlier_pairs=config.exclude_outlier_pairs
    )

    spaces = {m: corpus.matrices[m].data for m in corpus.matrices}
    if config.mode != "text_only":
        spaces["fused"] = space.data

    validity = {}
    iec_scores = {}
    for name in sorted(spaces):
        cv = cluster_validity(spaces[name], model.labels, space=name)
        validity[name] = None if cv is None else {
            "ch": cv.ch, "silhouette": cv.silhouette, "db": cv.db,
            "degenerate": cv.degenerate,
        }
        iec_scores[name] = iec(spaces[name], model.labels, diag=diag)

    topics_words = [[w for w, _ in model.topics[cid].top_words] for cid in sorted(model.topics)]
    documents = [seg.text for seg in corpus.segments]

    return {
        "video_id": corpus.video_id,
        "n_segments": len(corpus.segments),
        "structure": {
            "noise_ratio": structure.noise_ratio,
            "transition_rate": structure.transition_rate,
            "entropy_norm": structure.entropy_norm,
            "gini": structure.gini,
            "n_topics": structure.n_topics,
        },
        "validity": validity,
        "semantic": {
            "npmi": npmi(topics_words, documents, diag=diag),
            "diversity": topic_diversity(topics_words, config.cluster.top_k_words),
            "we_alignment": (
                we_alignment(topics_words, word_vectors, diag=diag) if word_vectors else None
            ),
            "iec": iec_scores,
        },
        "diagnostics": diag,
    }


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_json_ready(v) for v in obj.tolist()]
    return obj


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(_json_ready(obj), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _write_video_outputs(video, config, corpus, model, space, gates, summaries,
                         speakers, frame_report, selected_paths) -> None:
    out = config.output_dir / video.video_id
    out.mkdir(parents=True, exist_ok=True)

    topics_doc = {
        "video_id": video.video_id,
        "mode": config.mode,
        "labels": [int(l) for l in model.labels],
        "merge_log": [[int(a), int(b), float(s)] for a, b, s in model.merge_log],
        "topics": [
            {
                "id": cid,
                "size": model.topics[cid].size,
                "seed": model.seed_assignments.get(cid),
                "top_words": [[w, float(wt)] for w, wt in model.topics[cid].top_words],
                "summary": {
                    "method": summaries[cid].method,
                    "sentences": [
                        [text, float(score), int(idx)]
                        for text, score, idx in summaries[cid].sentences
                    ],
                },
            }
            for cid in sorted(model.topics)
        ],
    }
    _dump_json(topics_doc, out / "topics.json")

    speaker_by_index = {s.segment_index: s.label for s in (speakers or [])}
    gate_by_index = {i: g for i, g in enumerate(gates)} if gates else {}
    timeline = {
        "video_id": video.video_id,
        "segments": [
            {
                "index": seg.index,
                "start": seg.t_start,
                "end": seg.t_end,
                "text": seg.text,
                "topic": int(model.labels[seg.index]),
                "seed": (model.seed_matches or [None] * len(corpus.segments))[seg.index],
                "speaker": speaker_by_index.get(seg.index),
                "gate": (
                    float(gate_by_index[seg.index].gate) if seg.index in gate_by_index else None
                ),
                "frames": (selected_paths or {}).get(seg.index, []),
            }
            for seg in corpus.segments
        ],
    }
    _dump_json(timeline, out / "timeline.json")

    if config.mode != "text_only":
        write_embeddings(space, out / "fused.emb1")
    if gates:
        _dump_json(
            [
                {
                    "segment_index": i,
                    "gate": float(g.gate),
                    "sim_text_audio": float(g.sim_text_audio),
                    "sim_text_visual": float(g.sim_text_visual),
                    "sim_audio_visual": float(g.sim_audio_visual),
                    "degenerate": bool(g.degenerate),
                }
                for i, g in enumerate(gates)
            ],
            out / "gates.json",
        )
    if frame_report:
        with (out / "frames_selected.jsonl").open("w", encoding="utf-8") as fh:
            for row in frame_report:
                fh.write(json.dumps(_json_ready(row), sort_keys=True) + "\n")


class _WarningCollector(logging.Handler):
    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.records: list[str] = []

    def emit(self, record):
        self.records.append(self.format(record))


def _hash_file(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def run(config: PipelineConfig) -> RunResult:
    """Execute the pipeline over every configured video.

    A failing stage skips that video and is recorded in the manifest; the
    remaining videos still run. Outputs land under config.output_dir.
    """
    started = time.time()
    collector = _WarningCollector()
    logging.getLogger("tritopic").addHandler(collector)

    seeds = _load_seeds(config)
    stopwords = _load_stopwords(config)
    word_vectors = load_word_vectors(config.word_vectors) if config.word_vectors else None
    config.output_dir.mkdir(parents=True, exist_ok=True)

    def task(video: VideoInputs) -> VideoResult:
        t0 = time.time()
        try:
            result = _run_video(video, config, seeds, stopwords, word_vectors)
        except TritopicError as exc:
            log.warning("video %s failed: %s", video.video_id, exc)
            result = VideoResult(video_id=video.video_id, model=None, report=None,
                                 error=str(exc))
        result.elapsed = time.time() - t0
        return result

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(task, config.videos))
    else:
        results = [task(v) for v in config.videos]

    reports = [r.report for r in results if r.report is not None]
    corpus_report = {
        "definitions": METRIC_DEFINITIONS,
        "per_video": {r.video_id: r.report for r in results if r.report is not None},
        "aggregate": aggregate(reports) if reports else None,
        "failed_videos": sorted(r.video_id for r in results if r.error is not None),
    }
    _dump_json(corpus_report, config.output_dir / "metrics.json")

    input_hashes = {}
    for video in config.videos:
        input_hashes[str(video.segments_path)] = _hash_file(video.segments_path)
        for p in video.embedding_paths.values():
            input_hashes[str(p)] = _hash_file(p)
    manifest = {
        "tool_version": __version__,
        "config_hash": hashlib.sha256(
            json.dumps(_json_ready(config.raw), sort_keys=True).encode()
        ).hexdigest(),
        "input_hashes": input_hashes,
        "mode": config.mode,
        "definitions": METRIC_DEFINITIONS,
        "reducer": "deterministic principal-component projection (cosine geometry)",
        "videos": {
            r.video_id: {"error": r.error, "seconds": round(r.elapsed, 3)}
            for r in results
        },
        "warnings": collector.records,
        "total_seconds": round(time.time() - started, 3),
    }
    _dump_json(manifest, config.output_dir / "manifest.json")

    logging.getLogger("tritopic").removeHandler(collector)
    return RunResult(per_video=results, report=corpus_report, manifest=manifest)
