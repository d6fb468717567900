"""Evaluation metrics: topic structure, cluster validity, and semantic quality.

Every formula is pinned here (see METRIC_DEFINITIONS) so reports are
self-describing; each implementation is brute-force verifiable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

NPMI_EPS = 1e-12

METRIC_DEFINITIONS = {
    "noise_ratio": "fraction of segments with the outlier label -1",
    "transition_rate": "fraction of consecutive same-video segment pairs whose labels differ; "
                       "-1 counts as its own label",
    "entropy_norm": "Shannon entropy of non-outlier topic proportions / ln(T); 0 when T <= 1",
    "gini": "mean absolute difference of non-outlier topic sizes / (2 * mean size)",
    "n_topics": "count of non-outlier topics",
    "ch": "[trace(B)/(T-1)] / [trace(W)/(n-T)] over non-outlier points, Euclidean",
    "silhouette": "mean over non-outlier points of (b-a)/max(a,b); singleton clusters score 0",
    "db": "mean over clusters of max_j (s_i+s_j)/d(c_i,c_j); s = mean member-centroid distance",
    "npmi": "per topic: mean over top-word pairs of "
            "[ln(p_ij+eps)-ln p_i-ln p_j]/(-ln(p_ij+eps)) with document-level probabilities; "
            "averaged over topics",
    "diversity": "unique words across all topic lists / (T * top_k)",
    "we_alignment": "per topic: mean pairwise cosine of top-word vectors; averaged over topics",
    "iec": "per topic with >= 2 members: mean pairwise cosine of member embeddings; "
           "averaged over qualifying topics",
}


@dataclass
class StructureMetrics:
    noise_ratio: float
    transition_rate: float
    entropy_norm: float
    gini: float
    n_topics: int
    flagged: bool = False  # empty video or no consecutive pairs


@dataclass
class ClusterValidity:
    space: str
    ch: float | None
    silhouette: float | None
    db: float | None
    n_points: int
    n_clusters: int
    degenerate: bool = False


def structure_metrics(
    labels: np.ndarray,
    boundaries: list[tuple[int, int]] | None = None,
    exclude_outlier_pairs: bool = False,
) -> StructureMetrics:
    """Topic-structure profile of one label vector.

    `boundaries` lists half-open [start, end) per-video ranges so that pairs
    never straddle videos; default is a single video.
    """
    labels = np.asarray(labels, dtype=np.intp)
    n = len(labels)
    if n == 0:
        return StructureMetrics(0.0, 0.0, 0.0, 0.0, 0, flagged=True)
    boundaries = boundaries or [(0, n)]

    noise = float(np.sum(labels == -1)) / n

    transitions = 0
    pairs = 0
    for a, b in boundaries:
        for i in range(a, b - 1):
            if exclude_outlier_pairs and (labels[i] == -1 or labels[i + 1] == -1):
                continue
            pairs += 1
            if labels[i] != labels[i + 1]:
                transitions += 1
    transition_rate = transitions / pairs if pairs else 0.0

    sizes = np.bincount(labels[labels != -1]) if (labels != -1).any() else np.array([], dtype=int)
    sizes = sizes[sizes > 0]
    t = len(sizes)

    if t <= 1:
        entropy_norm = 0.0
    else:
        p = sizes / sizes.sum()
        entropy_norm = float(-(p * np.log(p)).sum() / math.log(t))

    if t == 0:
        gini = 0.0
    else:
        diffs = np.abs(sizes[:, None] - sizes[None, :]).sum()
        gini = float(diffs / (2.0 * t * t * sizes.mean()))

    return StructureMetrics(
        noise_ratio=noise,
        transition_rate=transition_rate,
        entropy_norm=entropy_norm,
        gini=gini,
        n_topics=t,
        flagged=pairs == 0,
    )


def _non_outlier(X: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(labels, dtype=np.intp)
    mask = labels != -1
    return np.asarray(X, dtype=np.float64)[mask], labels[mask]


def cluster_validity(X: np.ndarray, labels: np.ndarray, space: str) -> ClusterValidity | None:
    """Calinski-Harabasz, silhouette, and Davies-Bouldin over non-outlier points.

    Returns None (absent, not zero) when fewer than two clusters remain.
    Degenerate geometry (all-singleton clusters, coincident centroids) sets
    the flag and leaves the affected index as None.
    """
    Xc, lab = _non_outlier(X, labels)
    ids = np.unique(lab)
    if len(ids) < 2:
        return None
    n, t = len(Xc), len(ids)

    centroids = np.stack([Xc[lab == c].mean(axis=0) for c in ids])
    overall = Xc.mean(axis=0)
    sizes = np.array([(lab == c).sum() for c in ids])

    trace_b = float((sizes * ((centroids - overall) ** 2).sum(axis=1)).sum())
    trace_w = float(sum(((Xc[lab == c] - centroids[i]) ** 2).sum() for i, c in enumerate(ids)))

    degenerate = False
    if n - t == 0 or trace_w == 0.0:
        ch = None
        degenerate = True
    else:
        ch = (trace_b / (t - 1)) / (trace_w / (n - t))

    # direct differences (not the Gram-matrix shortcut): silhouette must match
    # a brute-force reference to 1e-9, which cancellation would break
    dist = np.empty((n, n))
    for i in range(n):
        dist[i] = np.linalg.norm(Xc - Xc[i], axis=1)
    sil_values = []
    for i in range(n):
        own = lab[i]
        same = lab == own
        if same.sum() <= 1:
            sil_values.append(0.0)
            degenerate = True
            continue
        a = dist[i][same].sum() / (same.sum() - 1)
        b = min(dist[i][lab == c].mean() for c in ids if c != own)
        denom = max(a, b)
        sil_values.append((b - a) / denom if denom > 0 else 0.0)
    silhouette = float(np.mean(sil_values))

    scatter = np.array(
        [np.linalg.norm(Xc[lab == c] - centroids[i], axis=1).mean() for i, c in enumerate(ids)]
    )
    cdist = np.sqrt(((centroids[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2))
    off = ~np.eye(t, dtype=bool)
    if np.any(cdist[off] == 0.0):
        db = None
        degenerate = True
    else:
        ratios = (scatter[:, None] + scatter[None, :]) / np.where(off, cdist, np.inf)
        db = float(ratios.max(axis=1).mean())

    return ClusterValidity(
        space=space,
        ch=ch,
        silhouette=silhouette,
        db=db,
        n_points=n,
        n_clusters=t,
        degenerate=degenerate,
    )


def npmi(
    topics_words: list[list[str]],
    documents: list[str],
    eps: float = NPMI_EPS,
    diag: dict | None = None,
) -> float | None:
    """Normalized pointwise mutual information of topic word pairs.

    Probabilities are document-level occurrence frequencies over the given
    transcripts. Pairs with a word absent from the corpus are skipped and
    counted in the coverage diagnostic.
    """
    doc_sets = [set(doc.lower().split()) for doc in documents]
    n_docs = len(doc_sets)
    if n_docs == 0:
        return None

    def p_single(w: str) -> float:
        return sum(1 for s in doc_sets if w in s) / n_docs

    skipped = 0
    total = 0
    topic_means = []
    for words in topics_words:
        pair_scores = []
        for i in range(len(words)):
            for j in range(i + 1, len(words)):
                total += 1
                wi, wj = words[i].lower(), words[j].lower()
                pi, pj = p_single(wi), p_single(wj)
                if pi == 0.0 or pj == 0.0:
                    skipped += 1
                    continue
                pij = sum(1 for s in doc_sets if wi in s and wj in s) / n_docs
                score = (math.log(pij + eps) - math.log(pi) - math.log(pj)) / (
                    -math.log(pij + eps)
                )
                pair_scores.append(score)
        if pair_scores:
            topic_means.append(sum(pair_scores) / len(pair_scores))

    if diag is not None:
        diag["npmi_pairs_total"] = total
        diag["npmi_pairs_skipped"] = skipped
    if not topic_means:
        return None
    return sum(topic_means) / len(topic_means)


def topic_diversity(topics_words: list[list[str]], top_k: int) -> float | None:
    """Unique words across all topics over T * top_k."""
    if not topics_words:
        return None
    unique = set()
    for words in topics_words:
        unique.update(words)
    return len(unique) / (len(topics_words) * top_k)


def _pairwise_cosine_mean(vectors: np.ndarray) -> float:
    norms = np.linalg.norm(vectors, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    unit = vectors / safe[:, None]
    sims = unit @ unit.T
    m = len(vectors)
    iu = np.triu_indices(m, k=1)
    return float(sims[iu].mean())


def we_alignment(
    topics_words: list[list[str]],
    word_vectors: dict[str, np.ndarray],
    diag: dict | None = None,
) -> float | None:
    """Mean pairwise cosine of each topic's covered top-word vectors, averaged over topics."""
    skipped = 0
    topic_means = []
    for words in topics_words:
        vecs = [word_vectors[w] for w in words if w in word_vectors]
        if len(vecs) < 2:
            skipped += 1
            continue
        topic_means.append(_pairwise_cosine_mean(np.stack(vecs)))
    if diag is not None:
        diag["we_topics_skipped"] = skipped
    if not topic_means:
        return None
    return sum(topic_means) / len(topic_means)


def iec(X: np.ndarray, labels: np.ndarray, diag: dict | None = None) -> float | None:
    """Embedding coherence: within-topic mean pairwise cosine, averaged over topics."""
    Xc = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.intp)
    topic_means = []
    skipped = 0
    for c in np.unique(labels[labels != -1]):
        members = Xc[labels == c]
        if len(members) < 2:
            skipped += 1
            continue
        topic_means.append(_pairwise_cosine_mean(members))
    if diag is not None:
        diag["iec_topics_skipped"] = skipped
    if not topic_means:
        return None
    return sum(topic_means) / len(topic_means)


def aggregate(per_video: list[dict]) -> dict:
    """Unweighted mean of every numeric leaf across videos, with coverage counts."""
    if not per_video:
        raise ValidationError("aggregate needs at least one per-video report")

    flat: dict[str, list[float]] = {}

    def walk(prefix: str, obj) -> None:
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(obj, bool):
            return
        elif isinstance(obj, (int, float)):
            flat.setdefault(prefix, []).append(float(obj))
        elif obj is None:
            flat.setdefault(prefix, [])

    for report in per_video:
        walk("", report)

    n = len(per_video)
    means = {k: (sum(v) / len(v) if v else None) for k, v in sorted(flat.items())}
    coverage = {k: len(v) for k, v in sorted(flat.items())}
    return {"n_videos": n, "mean": means, "coverage": coverage}


def load_word_vectors(path: str | Path) -> dict[str, np.ndarray]:
    """Plain-text table: one line per word, token then whitespace-separated decimals."""
    table: dict[str, np.ndarray] = {}
    dims = None
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: malformed vector ({exc})") from exc
            if vec.size == 0:
                raise ParseError(f"{path}:{lineno}: word {parts[0]!r} has no vector")
            if dims is None:
                dims = vec.size
            elif vec.size != dims:
                raise ParseError(
                    f"{path}:{lineno}: expected {dims} dims, got {vec.size}"
                )
            table[parts[0]] = vec
    return table
