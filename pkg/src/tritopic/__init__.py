"""Batch topic discovery for long-form video.

Segment-aligned text/audio/visual embeddings are fused through a
deterministic similarity gate, clustered into topics with optional guided
seeding, refined and summarized, and scored with a structural, geometric,
and semantic metric suite.
"""

__version__ = "0.1.0"

from .cluster import ClusterParams, SeedTopic, TopicModel, assign_topics
from .corpus import (
    EmbeddingMatrix,
    Segment,
    VideoCorpus,
    attach,
    load_embeddings,
    load_segments,
    write_embeddings,
)
from .fusion import FusedEmbedding, FusionWeights, fuse_corpus
from .frames import SelectionParams
from .metrics import structure_metrics, cluster_validity, npmi, topic_diversity, iec
from .pipeline import PipelineConfig, load_config, run
from .synth import SynthParams, generate_corpus, make_synthetic_corpus

__all__ = [
    "ClusterParams",
    "EmbeddingMatrix",
    "FusedEmbedding",
    "FusionWeights",
    "PipelineConfig",
    "SeedTopic",
    "Segment",
    "SelectionParams",
    "SynthParams",
    "TopicModel",
    "VideoCorpus",
    "assign_topics",
    "attach",
    "cluster_validity",
    "fuse_corpus",
    "generate_corpus",
    "iec",
    "load_config",
    "load_embeddings",
    "load_segments",
    "make_synthetic_corpus",
    "npmi",
    "run",
    "structure_metrics",
    "topic_diversity",
    "write_embeddings",
]
