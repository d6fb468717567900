"""Extractive per-topic summaries via TF-IDF centroid scoring."""

from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass

from .cluster import tokenize
from .corpus import Segment

log = logging.getLogger(__name__)

_BOUNDARY_RE = re.compile(r"[.!?](?=\s|$)")
MIN_SENTENCE_TOKENS = 3


@dataclass(frozen=True)
class Sentence:
    text: str
    segment_index: int
    position: int  # order within the segment's transcript


@dataclass
class TopicSummary:
    topic_id: int
    sentences: list[tuple[str, float, int]]  # (text, score, source segment index)
    method: str  # "tfidf_centroid" | "token_frequency_fallback"


def split_sentences(text: str, segment_index: int) -> list[Sentence]:
    """Split on ./!/? followed by whitespace or end; fragments under three
    tokens merge into their successor. Sentences are verbatim slices."""
    spans: list[tuple[int, int]] = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        spans.append((start, m.end()))
        start = m.end()
    if start < len(text) and text[start:].strip():
        spans.append((start, len(text)))

    merged: list[tuple[int, int]] = []
    for span in spans:
        if merged and len(text[merged[-1][0]:merged[-1][1]].split()) < MIN_SENTENCE_TOKENS:
            merged[-1] = (merged[-1][0], span[1])
        else:
            merged.append(span)

    out = []
    for pos, (a, b) in enumerate(merged):
        chunk = text[a:b].strip()
        if chunk:
            out.append(Sentence(text=chunk, segment_index=segment_index, position=pos))
    return out


def _tfidf_vectors(
    token_lists: list[list[str]],
) -> list[dict[str, float]]:
    # smooth idf: the bare log(n/df) zeroes any term present in every
    # sentence, which would let rare-word outliers outrank the dominant
    # repeated sentence
    n = len(token_lists)
    df: Counter = Counter()
    for tokens in token_lists:
        df.update(set(tokens))
    vectors = []
    for tokens in token_lists:
        tf = Counter(tokens)
        vectors.append({t: c * (math.log(n / df[t]) + 1.0) for t, c in tf.items()})
    return vectors


def _cosine(a: dict[str, float], b: dict[str, float]) -> float:
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    na = math.sqrt(sum(w * w for w in a.values()))
    nb = math.sqrt(sum(w * w for w in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def summarize_topic(
    topic_id: int,
    topic_segments: list[Segment],
    k_max: int = 4,
    stopwords: frozenset[str] = frozenset(),
) -> TopicSummary:
    """Pick up to k_max sentences closest to the topic's TF-IDF centroid.

    When stopword filtering leaves no vocabulary, sentences fall back to the
    sum of their tokens' frequencies over the topic corpus. Ties break toward
    the earlier segment, then the earlier sentence position.
    """
    sentences: list[Sentence] = []
    for seg in topic_segments:
        if seg.text.strip():
            sentences.extend(split_sentences(seg.text, seg.index))
    if not sentences:
        log.warning("topic %d has no non-empty transcripts; empty summary", topic_id)
        return TopicSummary(topic_id=topic_id, sentences=[], method="tfidf_centroid")

    filtered = [tokenize(s.text, stopwords) for s in sentences]
    if any(filtered):
        vectors = _tfidf_vectors(filtered)
        centroid: dict[str, float] = {}
        for vec in vectors:
            for t, w in vec.items():
                centroid[t] = centroid.get(t, 0.0) + w / len(vectors)
        scores = [_cosine(vec, centroid) for vec in vectors]
        method = "tfidf_centroid"
    else:
        raw = [tokenize(s.text) for s in sentences]
        corpus_freq: Counter = Counter()
        for tokens in raw:
            corpus_freq.update(tokens)
        scores = [float(sum(corpus_freq[t] for t in tokens)) for tokens in raw]
        method = "token_frequency_fallback"

    order = sorted(
        range(len(sentences)),
        key=lambda i: (-scores[i], sentences[i].segment_index, sentences[i].position),
    )
    chosen = [
        (sentences[i].text, float(scores[i]), sentences[i].segment_index)
        for i in order[:k_max]
    ]
    return TopicSummary(topic_id=topic_id, sentences=chosen, method=method)
