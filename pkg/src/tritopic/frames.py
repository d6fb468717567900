"""Representative-frame selection: candidate sampling, quality scoring, greedy diverse ranking."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import cv2
import numpy as np

from .errors import InputError, ValidationError

log = logging.getLogger(__name__)

PATCH_SIZE = 32
HIST_BINS = 16

# Assumed minimum frame duration; spans shorter than this collapse to a midpoint.
MIN_SPAN_SECONDS = 1.0 / 30.0


@dataclass(frozen=True)
class SelectionParams:
    """Knobs for per-segment frame selection."""

    frames_per_segment: int = 5
    pool_multiplier: int = 4
    min_candidates: int = 8
    center_weight: float = 0.7
    sharpness_weight: float = 0.3
    diversity_weight: float = 0.3
    dedup_threshold: float = 0.96

    def __post_init__(self):
        if abs(self.center_weight + self.sharpness_weight - 1.0) > 1e-9:
            raise ValidationError("center_weight + sharpness_weight must equal 1")
        if not 0.0 < self.dedup_threshold <= 1.0:
            raise ValidationError("dedup_threshold must lie in (0, 1]")
        if not 0.0 <= self.diversity_weight <= 1.0:
            raise ValidationError("diversity_weight must lie in [0, 1]")

    @property
    def pool_size(self) -> int:
        return max(
            self.frames_per_segment,
            self.pool_multiplier * self.frames_per_segment,
            self.min_candidates,
        )


@dataclass
class FrameCandidate:
    """One sampled frame: unit-norm texture-color feature plus sharpness scores."""

    timestamp: float
    feature: np.ndarray
    sharpness_raw: float
    sharpness_norm: float | None = None


def candidate_timestamps(
    t_start: float,
    t_end: float,
    params: SelectionParams,
    min_span: float = MIN_SPAN_SECONDS,
) -> np.ndarray:
    """Evenly spaced interior timestamps; degenerate spans fall back to the midpoint."""
    if not t_end > t_start:
        raise ValidationError(f"empty span [{t_start}, {t_end}]")
    span = t_end - t_start
    if span < min_span:
        log.warning("span [%.4f, %.4f] below one frame duration; using midpoint", t_start, t_end)
        return np.array([t_start + 0.5 * span])
    pool = params.pool_size
    j = np.arange(1, pool + 1, dtype=np.float64)
    return t_start + j / (pool + 1) * span


def center_preference(timestamp: float, t_start: float, t_end: float) -> float:
    """1 at the segment midpoint, falling linearly to 0 at the edges."""
    if not t_end > t_start:
        raise ValidationError(f"empty span [{t_start}, {t_end}]")
    mid = 0.5 * (t_start + t_end)
    half = 0.5 * (t_end - t_start)
    return 1.0 - min(1.0, abs(timestamp - mid) / half)


def describe_frame(image: np.ndarray) -> tuple[np.ndarray, float]:
    """Texture-color descriptor and raw sharpness for one RGB frame.

    The descriptor concatenates a 32x32 grayscale patch (values in [0, 1])
    with a 16-bin histogram per RGB channel (each normalized to sum 1), then
    L2-normalizes. Sharpness is the variance of the 3x3 Laplacian response.
    """
    img = np.asarray(image)
    if img.ndim == 2:
        img = np.stack([img] * 3, axis=-1)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] == 0 or img.shape[1] == 0:
        raise InputError(f"expected a non-empty RGB raster, got shape {img.shape}")
    img = img.astype(np.uint8)

    gray = cv2.cvtColor(img, cv2.COLOR_RGB2GRAY)
    patch = cv2.resize(gray, (PATCH_SIZE, PATCH_SIZE), interpolation=cv2.INTER_AREA)
    patch = patch.astype(np.float64) / 255.0

    hists = []
    for ch in range(3):
        h, _ = np.histogram(img[:, :, ch], bins=HIST_BINS, range=(0, 256))
        hists.append(h / h.sum())

    feature = np.concatenate([patch.ravel()] + hists)
    feature /= np.linalg.norm(feature)

    laplacian = cv2.Laplacian(gray.astype(np.float64), cv2.CV_64F, ksize=1)
    return feature, float(laplacian.var())


def normalize_sharpness(candidates: list[FrameCandidate]) -> list[FrameCandidate]:
    """Min-max normalize raw sharpness over one segment's pool; all-equal pools get 1."""
    if not candidates:
        return []
    raw = np.array([c.sharpness_raw for c in candidates], dtype=np.float64)
    lo, hi = raw.min(), raw.max()
    if hi - lo <= 0.0:
        norm = np.ones_like(raw)
    else:
        norm = (raw - lo) / (hi - lo)
    return [replace(c, sharpness_norm=float(s)) for c, s in zip(candidates, norm)]


def rank_and_select(
    candidates: list[FrameCandidate],
    t_start: float,
    t_end: float,
    params: SelectionParams,
) -> list[int]:
    """Greedy diversity-penalized selection of at most `frames_per_segment` candidates.

    The first pick maximizes relevance (center preference blended with
    normalized sharpness); later picks maximize
    (1 - diversity_weight) * relevance - diversity_weight * max-similarity to
    the picked set. Candidates more similar than `dedup_threshold` to any
    picked frame become ineligible. Ties break toward the lower index.
    """
    if not candidates:
        return []
    for c in candidates:
        if c.sharpness_norm is None:
            raise ValidationError("candidates must be sharpness-normalized before ranking")

    features = np.stack([np.asarray(c.feature, dtype=np.float64) for c in candidates])
    sims = features @ features.T
    relevance = np.array(
        [
            params.center_weight * center_preference(c.timestamp, t_start, t_end)
            + params.sharpness_weight * c.sharpness_norm
            for c in candidates
        ]
    )

    nu = params.diversity_weight
    selected: list[int] = [int(np.argmax(relevance))]
    while len(selected) < params.frames_per_segment:
        max_sim = sims[:, selected].max(axis=1)
        eligible = max_sim <= params.dedup_threshold
        eligible[selected] = False
        if not eligible.any():
            break
        score = np.where(eligible, (1.0 - nu) * relevance - nu * max_sim, -np.inf)
        selected.append(int(np.argmax(score)))
    return selected


def pool_visual(frame_embeddings: np.ndarray) -> np.ndarray:
    """Permutation-invariant mean over frame embedding rows."""
    m = np.asarray(frame_embeddings, dtype=np.float64)
    if m.ndim != 2:
        raise ValidationError(f"expected a 2-D frame matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        log.warning("segment has no usable frames; pooling to a zero vector")
        return np.zeros(m.shape[1])
    return m.mean(axis=0)
