import time

import numpy as np
import pytest

from tritopic.cluster import ClusterParams, assign_topics
from tritopic.density import pairwise_distances
from tritopic.metrics import cluster_validity, structure_metrics
from tritopic.synth import SynthParams, generate_corpus


def planted_blobs(rng, n_blobs, points_per_blob, separation=10.0, dim=3, sigma=1.0):
    """Well-separated Gaussian blobs; returns (points, labels)."""
    while True:
        centers = rng.normal(size=(n_blobs, dim)) * separation * 2
        d = pairwise_distances(centers)
        np.fill_diagonal(d, np.inf)
        if d.min() >= separation * sigma:
            break
    points, labels = [], []
    for b in range(n_blobs):
        count = points_per_blob[b] if hasattr(points_per_blob, "__len__") else points_per_blob
        points.append(centers[b] + rng.normal(size=(count, dim)) * sigma)
        labels.extend([b] * count)
    return np.vstack(points), np.array(labels)

# Generator settings for the directional-effect corpora: text weakly
# informative and style-confounded, audio moderately informative, visual
# strongly informative.
EFFECT_INFORM = {"text": 0.2, "audio": 0.5, "visual": 1.0}
EFFECT_NUISANCE = {"text": 0.3, "audio": 0.25}
EFFECT_NOISE = 0.33
N_EFFECT_CORPORA = 20

MODES = ("text_only", "text_audio", "text_visual", "full")


@pytest.fixture(scope="session")
def effect_corpora_stats():
    """Per-corpus mode statistics over the 20 seeded directional corpora.

    Computed once and shared by the directional acceptance checks. Each entry
    maps mode -> {noise, trans, ch_visual} where the first two are means over
    the corpus's videos and ch_visual is the mean visual-space CH under that
    mode's labels (None when undefined for every video). Returns
    (stats, elapsed_seconds).
    """
    started = time.perf_counter()
    stats = []
    for seed in range(N_EFFECT_CORPORA):
        params = SynthParams(
            n_videos=10,
            segments_per_video=60,
            n_topics=4,
            informativeness=EFFECT_INFORM,
            nuisance=EFFECT_NUISANCE,
            noise_scale=EFFECT_NOISE,
            seed=seed,
        )
        corpora, _ = generate_corpus(params)
        per_mode = {}
        for mode in MODES:
            noises, transs, chs = [], [], []
            for corpus in corpora:
                model = assign_topics(corpus, ClusterParams(), mode=mode)
                sm = structure_metrics(model.labels)
                noises.append(sm.noise_ratio)
                transs.append(sm.transition_rate)
                cv = cluster_validity(corpus.matrices["visual"].data, model.labels, "visual")
                if cv is not None and cv.ch is not None:
                    chs.append(cv.ch)
            per_mode[mode] = {
                "noise": float(np.mean(noises)),
                "trans": float(np.mean(transs)),
                "ch_visual": float(np.mean(chs)) if chs else None,
            }
        stats.append(per_mode)
    return stats, time.perf_counter() - started
