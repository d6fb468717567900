"""Speaker-style labels from audio embeddings; metadata only, never fed to topic assignment."""

from __future__ import annotations

from dataclasses import dataclass

from .cluster import ClusterParams
from .corpus import VideoCorpus
from .density import density_cluster
from .reducer import reduce_embeddings


@dataclass(frozen=True)
class SpeakerLabel:
    segment_index: int
    label: int  # -1 = noise


def speaker_style_labels(
    corpus: VideoCorpus, params: ClusterParams | None = None
) -> list[SpeakerLabel]:
    """Reduce and density-cluster the audio matrix into style labels."""
    params = params or ClusterParams()
    audio = corpus.matrix("audio")
    reduced = reduce_embeddings(audio.data, params.reducer_components)
    labels = density_cluster(reduced, params.min_cluster_size)
    return [SpeakerLabel(segment_index=i, label=int(l)) for i, l in enumerate(labels)]
