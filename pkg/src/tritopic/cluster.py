"""Topic assignment: guided seeding, reduction, density clustering, c-TF-IDF words, merging."""

from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import Segment, VideoCorpus
from .density import density_cluster
from .errors import ConfigError, ValidationError
from .fusion import FusionWeights, build_mode_matrix
from .reducer import reduce_embeddings

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


@dataclass(frozen=True)
class ClusterParams:
    """Knobs for the reduce/cluster/represent/merge chain."""

    reducer_components: int = 8
    reducer_neighbors: int = 15  # reserved for neighbor-graph reducers
    min_cluster_size: int = 5
    merge_threshold: float = 0.70
    top_k_words: int = 10
    min_doc_freq: int = 2
    seed_blend_threshold: float = 0.3

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise ValidationError("min_cluster_size must be at least 2")
        if not 0.0 < self.merge_threshold <= 1.0:
            raise ValidationError("merge_threshold must lie in (0, 1]")


@dataclass
class SeedTopic:
    """A named theme used to nudge text embeddings before clustering."""

    name: str
    words: list[str]
    centroid: np.ndarray | None = None

    def __post_init__(self):
        if not self.words:
            raise ValidationError(f"seed topic {self.name!r} has no words")
        if self.centroid is not None:
            self.centroid = np.asarray(self.centroid, dtype=np.float64)
            norm = np.linalg.norm(self.centroid)
            if abs(norm - 1.0) > 1e-6:
                raise ValidationError(f"seed centroid for {self.name!r} is not unit-norm")


@dataclass
class TopicInfo:
    """Per-topic size, pooled token counts, term weights, and ranked words."""

    size: int
    counts: Counter
    weights: dict[str, float] = field(default_factory=dict)
    top_words: list[tuple[str, float]] = field(default_factory=list)


@dataclass
class TopicModel:
    """Labels plus topic representations for one video."""

    labels: np.ndarray
    topics: dict[int, TopicInfo]
    merge_log: list[tuple[int, int, float]] = field(default_factory=list)
    seed_matches: list[str | None] | None = None
    seed_assignments: dict[int, str | None] = field(default_factory=dict)
    mode: str = "full"

    @property
    def n_topics(self) -> int:
        return len(self.topics)


def tokenize(text: str, stopwords: frozenset[str] = frozenset()) -> list[str]:
    """Lowercased word tokens of length >= 2, minus stopwords."""
    return [
        t for t in _TOKEN_RE.findall(text.lower())
        if len(t) >= 2 and t not in stopwords
    ]


def seed_centroids_from_words(
    seeds: list[SeedTopic], word_vectors: dict[str, np.ndarray]
) -> list[SeedTopic]:
    """Fill missing centroids with the normalized mean of the seed words' vectors."""
    out = []
    for seed in seeds:
        if seed.centroid is not None:
            out.append(seed)
            continue
        vecs = [word_vectors[w] for w in seed.words if w in word_vectors]
        if not vecs:
            raise ConfigError(
                f"seed topic {seed.name!r} has no centroid and none of its words "
                "appear in the word-vector table"
            )
        mean = np.mean(vecs, axis=0)
        out.append(replace(seed, centroid=mean / np.linalg.norm(mean)))
    return out


def guided_blend(
    text_embeddings: np.ndarray,
    seeds: list[SeedTopic],
    threshold: float,
) -> tuple[np.ndarray, list[str | None]]:
    """Pull each text embedding halfway toward its best-matching seed centroid.

    Rows whose best cosine falls below `threshold` pass through unchanged.
    Returns the blended matrix and the per-row matched seed name (None when
    no seed cleared the threshold).
    """
    for seed in seeds:
        if seed.centroid is None:
            raise ConfigError(f"seed topic {seed.name!r} has no centroid")
    X = np.asarray(text_embeddings, dtype=np.float64)
    centroids = np.stack([s.centroid for s in seeds])

    norms = np.linalg.norm(X, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    cos = (X / safe[:, None]) @ centroids.T
    best = np.argmax(cos, axis=1)
    best_cos = cos[np.arange(len(X)), best]

    blended = X.copy()
    matches: list[str | None] = [None] * len(X)
    for i in range(len(X)):
        if norms[i] == 0 or best_cos[i] < threshold:
            continue
        mixed = (X[i] + centroids[best[i]]) / 2.0
        mixed_norm = np.linalg.norm(mixed)
        if mixed_norm > 0:
            blended[i] = mixed / mixed_norm
            matches[i] = seeds[best[i]].name
    return blended, matches


def _document_frequencies(token_lists: list[list[str]]) -> Counter:
    df: Counter = Counter()
    for tokens in token_lists:
        df.update(set(tokens))
    return df


def class_term_weights(
    class_counts: dict[int, Counter], top_k: int
) -> tuple[dict[int, dict[str, float]], dict[int, list[tuple[str, float]]]]:
    """Class-based TF-IDF: weight(t, c) = tf * log(1 + A / f_t).

    A is the mean token count per class and f_t the total frequency of the
    term across classes. Top words sort by weight descending, ties
    lexicographic.
    """
    n_classes = len(class_counts)
    total_tokens = sum(sum(c.values()) for c in class_counts.values())
    mean_class_tokens = total_tokens / n_classes if n_classes else 0.0
    corpus_freq: Counter = Counter()
    for counts in class_counts.values():
        corpus_freq.update(counts)

    weights: dict[int, dict[str, float]] = {}
    top_words: dict[int, list[tuple[str, float]]] = {}
    for cid, counts in class_counts.items():
        w = {
            term: tf * math.log(1.0 + mean_class_tokens / corpus_freq[term])
            for term, tf in counts.items()
        }
        weights[cid] = w
        ranked = sorted(w.items(), key=lambda kv: (-kv[1], kv[0]))
        top_words[cid] = ranked[:top_k]
    return weights, top_words


def ctfidf(
    labels: np.ndarray,
    segments: list[Segment],
    params: ClusterParams,
    stopwords: frozenset[str] = frozenset(),
) -> dict[int, TopicInfo]:
    """Build per-topic term weights from pooled member transcripts.

    The vocabulary keeps tokens whose document frequency over the video's
    segments reaches `min_doc_freq`; outlier segments contribute to document
    frequency but form no class.
    """
    token_lists = [tokenize(seg.text, stopwords) for seg in segments]
    df = _document_frequencies(token_lists)
    vocab = {t for t, n in df.items() if n >= params.min_doc_freq}

    class_counts: dict[int, Counter] = {}
    sizes: Counter = Counter()
    for label, tokens in zip(labels, token_lists):
        lab = int(label)
        if lab == -1:
            continue
        sizes[lab] += 1
        class_counts.setdefault(lab, Counter()).update(t for t in tokens if t in vocab)

    weights, top_words = class_term_weights(class_counts, params.top_k_words)
    topics = {}
    for cid in sorted(class_counts):
        if not class_counts[cid]:
            log.warning("topic %d has no tokens after vocabulary filtering", cid)
        topics[cid] = TopicInfo(
            size=sizes[cid],
            counts=class_counts[cid],
            weights=weights[cid],
            top_words=top_words[cid],
        )
    return topics


def _cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if not a or not b:
        return 0.0
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    na = math.sqrt(sum(w * w for w in a.values()))
    nb = math.sqrt(sum(w * w for w in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def merge_topics(
    model: TopicModel, threshold: float, top_k: int = 10
) -> TopicModel:
    """Greedily merge the most word-similar topic pair until no cosine exceeds the threshold.

    The smaller topic is absorbed into the larger (equal sizes: the lower id
    absorbs); weights are recomputed from the pooled counts after each merge.
    Final topic ids are renumbered densely by size (ties by prior id).
    """
    labels = model.labels.copy()
    topics = {cid: replace(info, counts=Counter(info.counts)) for cid, info in model.topics.items()}
    merge_log = list(model.merge_log)

    while len(topics) > 1:
        ids = sorted(topics)
        best_pair = None
        best_sim = threshold
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                sim = _cosine(topics[a].weights, topics[b].weights)
                if sim > best_sim:
                    best_sim = sim
                    best_pair = (a, b)
        if best_pair is None:
            break
        a, b = best_pair  # a < b by construction
        into, absorbed = (b, a) if topics[b].size > topics[a].size else (a, b)
        topics[into].counts.update(topics[absorbed].counts)
        topics[into].size += topics[absorbed].size
        del topics[absorbed]
        labels[labels == absorbed] = into
        merge_log.append((absorbed, into, best_sim))

        weights, top_words = class_term_weights({c: t.counts for c, t in topics.items()}, top_k)
        for cid in topics:
            topics[cid].weights = weights[cid]
            topics[cid].top_words = top_words[cid]

    labels, topics = _renumber_by_size(labels, topics)
    merged = TopicModel(
        labels=labels,
        topics=topics,
        merge_log=merge_log,
        seed_matches=model.seed_matches,
        mode=model.mode,
    )
    merged.seed_assignments = _assign_seeds(merged)
    return merged


def _renumber_by_size(
    labels: np.ndarray, topics: dict[int, TopicInfo]
) -> tuple[np.ndarray, dict[int, TopicInfo]]:
    order = sorted(topics, key=lambda cid: (-topics[cid].size, cid))
    mapping = {old: new for new, old in enumerate(order)}
    new_labels = np.array([mapping.get(int(l), -1) for l in labels], dtype=np.intp)
    new_topics = {mapping[old]: topics[old] for old in order}
    return new_labels, new_topics


def _assign_seeds(model: TopicModel) -> dict[int, str | None]:
    """Majority seed match among each topic's members; ties break lexicographically."""
    assignments: dict[int, str | None] = {cid: None for cid in model.topics}
    if model.seed_matches is None:
        return assignments
    for cid in model.topics:
        votes = Counter(
            m for m, lab in zip(model.seed_matches, model.labels)
            if lab == cid and m is not None
        )
        if votes:
            best_count = max(votes.values())
            assignments[cid] = min(m for m, n in votes.items() if n == best_count)
    return assignments


def assign_topics(
    corpus: VideoCorpus,
    params: ClusterParams,
    mode: str = "full",
    seeds: list[SeedTopic] | None = None,
    weights: FusionWeights | None = None,
    stopwords: frozenset[str] = frozenset(),
) -> TopicModel:
    """Full topic-assignment chain for one video.

    Seed blending happens in text space before any fusion; the mode then
    selects which embedding space is reduced and clustered.
    """
    model, _, _ = assign_topics_detailed(corpus, params, mode, seeds, weights, stopwords)
    return model


def assign_topics_detailed(
    corpus: VideoCorpus,
    params: ClusterParams,
    mode: str = "full",
    seeds: list[SeedTopic] | None = None,
    weights: FusionWeights | None = None,
    stopwords: frozenset[str] = frozenset(),
):
    """As assign_topics, but also returns the clustered space matrix and gate records."""
    text = corpus.matrix("text").data
    if seeds:
        blended, matches = guided_blend(text, seeds, params.seed_blend_threshold)
    else:
        blended, matches = None, None

    space, gates = build_mode_matrix(corpus, mode, weights=weights, text_override=blended)
    reduced = reduce_embeddings(space.data, params.reducer_components)
    labels = density_cluster(reduced, params.min_cluster_size)

    if (labels != -1).any():
        topics = ctfidf(labels, corpus.segments, params, stopwords)
    else:
        topics = {}
    model = TopicModel(labels=labels, topics=topics, seed_matches=matches, mode=mode)
    model = merge_topics(model, params.merge_threshold, top_k=params.top_k_words)
    return model, space, gates
