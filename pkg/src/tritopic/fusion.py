"""Similarity-gated tri-modal fusion and the bi-modal concatenation baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import EmbeddingMatrix, VideoCorpus
from .errors import ConfigError, DimensionError, ValidationError

MODES = ("text_only", "text_audio", "text_visual", "full")

# Fused layout: three gated modality blocks plus four element-wise
# interaction blocks, each of length d_min.
FUSED_BLOCKS = 7


@dataclass(frozen=True)
class FusionWeights:
    """Per-modality weights applied to the gated blocks."""

    text: float = 0.34
    audio: float = 0.33
    visual: float = 0.33

    def __post_init__(self):
        for name, w in (("text", self.text), ("audio", self.audio), ("visual", self.visual)):
            if not 0.0 < w <= 1.0:
                raise ValidationError(f"fusion weight {name}={w} must lie in (0, 1]")


@dataclass
class FusedEmbedding:
    """One segment's fused vector plus its gate diagnostics."""

    vector: np.ndarray
    min_dim: int
    gate: float
    sim_text_audio: float
    sim_text_visual: float
    sim_audio_visual: float
    degenerate: bool = False


def normalize_truncate(x: np.ndarray, min_dim: int) -> np.ndarray:
    """Leading `min_dim` coordinates, L2-normalized; zero input stays zero."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < min_dim or min_dim < 1:
        raise DimensionError(f"cannot truncate length-{x.shape} vector to {min_dim}")
    head = x[:min_dim]
    norm = np.linalg.norm(head)
    if norm == 0.0:
        return np.zeros(min_dim)
    return head / norm


def scale_from_sims(sim_ta: float, sim_tv: float, sim_av: float) -> float:
    """Gate value in [0, 1]: high when the three modalities agree pairwise."""
    return (sim_ta + sim_tv + sim_av + 3.0) / 6.0


def gate(t: np.ndarray, a: np.ndarray, v: np.ndarray) -> tuple[tuple[float, float, float], float]:
    """Pairwise dot products of unit-or-zero vectors and the resulting gate value."""
    sims = (float(t @ a), float(t @ v), float(a @ v))
    return sims, scale_from_sims(*sims)


def fuse(
    t: np.ndarray,
    a: np.ndarray,
    v: np.ndarray,
    weights: FusionWeights,
    gate_value: float,
) -> FusedEmbedding:
    """Concatenate gated modality blocks with their element-wise interactions, then normalize."""
    t, a, v = (np.asarray(x, dtype=np.float64) for x in (t, a, v))
    if not t.shape == a.shape == v.shape or t.ndim != 1:
        raise DimensionError(
            f"fusion inputs must share one dimensionality, got {t.shape}/{a.shape}/{v.shape}"
        )
    d = t.shape[0]
    raw = np.concatenate(
        [
            weights.text * gate_value * t,
            weights.audio * gate_value * a,
            weights.visual * gate_value * v,
            t * a,
            t * v,
            a * v,
            t * a * v,
        ]
    )
    norm = np.linalg.norm(raw)
    sims, _ = gate(t, a, v)
    if norm == 0.0:
        return FusedEmbedding(raw, d, gate_value, *sims, degenerate=True)
    return FusedEmbedding(raw / norm, d, gate_value, *sims)


def fuse_segment(
    text: np.ndarray,
    audio: np.ndarray,
    visual: np.ndarray,
    weights: FusionWeights,
) -> FusedEmbedding:
    """Full per-segment fusion from raw modality vectors."""
    d_min = min(len(text), len(audio), len(visual))
    t = normalize_truncate(text, d_min)
    a = normalize_truncate(audio, d_min)
    v = normalize_truncate(visual, d_min)
    _, s = gate(t, a, v)
    return fuse(t, a, v, weights, s)


def fuse_corpus(
    corpus: VideoCorpus,
    weights: FusionWeights,
    text_override: np.ndarray | None = None,
) -> tuple[EmbeddingMatrix, list[FusedEmbedding]]:
    """Fuse every segment; returns the fused matrix plus per-row gate records.

    `text_override` substitutes for the attached text matrix (used when the
    text space was nudged toward seed centroids before fusion).
    """
    for modality in ("text", "audio", "visual"):
        if modality not in corpus.matrices:
            raise ConfigError(f"{corpus.video_id}: fusion requires a {modality!r} matrix")
    text = corpus.matrices["text"].data if text_override is None else np.asarray(text_override)
    audio = corpus.matrices["audio"].data
    visual = corpus.matrices["visual"].data

    records = [
        fuse_segment(text[i], audio[i], visual[i], weights)
        for i in range(len(corpus.segments))
    ]
    d_min = min(text.shape[1], audio.shape[1], visual.shape[1])
    data = np.zeros((len(records), FUSED_BLOCKS * d_min), dtype=np.float64)
    for i, rec in enumerate(records):
        data[i] = rec.vector
    matrix = EmbeddingMatrix(modality="fused", data=data, source="gated-trimodal")
    return matrix, records


def concat_pair(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bi-modal baseline: normalize, truncate to the pairwise minimum, concatenate, renormalize."""
    d_min = min(len(x), len(y))
    raw = np.concatenate([normalize_truncate(x, d_min), normalize_truncate(y, d_min)])
    norm = np.linalg.norm(raw)
    if norm == 0.0:
        return raw
    return raw / norm


def build_mode_matrix(
    corpus: VideoCorpus,
    mode: str,
    weights: FusionWeights | None = None,
    text_override: np.ndarray | None = None,
) -> tuple[EmbeddingMatrix, list[FusedEmbedding] | None]:
    """Build the embedding space a topic assignment mode clusters in.

    text_only passes the text matrix through; the bi-modal modes concatenate
    two normalized truncations with no gate or interaction terms; full runs
    the gated fusion. Gate records come back only for full.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    text = corpus.matrix("text").data if text_override is None else np.asarray(text_override)
    n = len(corpus.segments)

    if mode == "text_only":
        return EmbeddingMatrix(modality="text", data=text, source="text-passthrough"), None
    if mode == "full":
        return fuse_corpus(corpus, weights or FusionWeights(), text_override=text_override)

    other = corpus.matrix("audio" if mode == "text_audio" else "visual").data
    rows = [concat_pair(text[i], other[i]) for i in range(n)]
    d_min = min(text.shape[1], other.shape[1])
    data = np.asarray(rows, dtype=np.float64).reshape(n, 2 * d_min)
    return EmbeddingMatrix(modality="fused", data=data, source=f"concat-{mode}"), None
