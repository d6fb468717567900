"""Encoder backends: pretrained models when available, deterministic fallbacks otherwise.

Each modality exposes encode(items) -> (matrix, source, errors). Primary
models load lazily on first use; any import or load failure switches that
modality to its fallback for the rest of the process. The `source` field
always records the backend that actually produced the rows.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .audio import energy_segments, load_wav_mono_16k, mfcc_span_descriptor
from .features import TEXT_DIMS, hashed_text_vector, image_vector

log = logging.getLogger(__name__)

TEXT_MODEL = "sentence-transformers/all-mpnet-base-v2"
AUDIO_MODEL = "laion/clap-htsat-unfused"
VISUAL_MODEL = "openai/clip-vit-base-patch32"
ASR_MODEL = "openai/whisper-base"


class _LazyPrimary:
    """Caches one load attempt; None afterwards means 'use the fallback'."""

    def __init__(self, name: str, loader):
        self.name = name
        self._loader = loader
        self._attempted = False
        self._model = None

    def get(self):
        if not self._attempted:
            self._attempted = True
            try:
                self._model = self._loader()
                log.info("loaded primary backend %s", self.name)
            except Exception as exc:  # any failure falls back
                log.warning("primary backend %s unavailable: %s", self.name, exc)
                self._model = None
        return self._model


def _load_sentence_encoder():
    from sentence_transformers import SentenceTransformer

    return SentenceTransformer(TEXT_MODEL)


def _load_clap():
    from transformers import ClapModel, ClapProcessor

    return ClapModel.from_pretrained(AUDIO_MODEL), ClapProcessor.from_pretrained(AUDIO_MODEL)


def _load_clip():
    from transformers import CLIPModel, CLIPProcessor

    return CLIPModel.from_pretrained(VISUAL_MODEL), CLIPProcessor.from_pretrained(VISUAL_MODEL)


def _load_whisper():
    from transformers import pipeline

    return pipeline("automatic-speech-recognition", model=ASR_MODEL,
                    return_timestamps=True)


class TextBackend:
    def __init__(self, allow_primary: bool = True):
        self._primary = _LazyPrimary("text", _load_sentence_encoder) if allow_primary else None

    def encode(self, items: list[str]):
        model = self._primary.get() if self._primary else None
        if model is not None:
            data = np.asarray(model.encode(items, convert_to_numpy=True))
            return data.reshape(len(items), -1), TEXT_MODEL, []
        data = np.zeros((len(items), TEXT_DIMS))
        for i, text in enumerate(items):
            data[i] = hashed_text_vector(text)
        return data, "hashed-bow-fallback", []


class AudioBackend:
    def __init__(self, allow_primary: bool = True):
        self._primary = _LazyPrimary("audio", _load_clap) if allow_primary else None
        self._cache: dict[str, np.ndarray] = {}

    def _samples(self, path: str) -> np.ndarray:
        if path not in self._cache:
            self._cache[path] = load_wav_mono_16k(path)
        return self._cache[path]

    def encode(self, items: list[dict]):
        pair = self._primary.get() if self._primary else None
        errors: list[dict] = []
        if pair is not None:
            model, processor = pair
            rows = []
            for i, item in enumerate(items):
                try:
                    samples = self._samples(item["file"])
                    a = int(float(item["start"]) * 16_000)
                    b = int(float(item["end"]) * 16_000)
                    inputs = processor(audios=samples[a:b], sampling_rate=16_000,
                                       return_tensors="pt")
                    rows.append(model.get_audio_features(**inputs).detach().numpy()[0])
                except Exception as exc:
                    errors.append({"index": i, "error": str(exc)})
                    rows.append(None)
            dims = next((len(r) for r in rows if r is not None), 1)
            data = np.stack([r if r is not None else np.zeros(dims) for r in rows])
            return data, AUDIO_MODEL, errors

        data = np.zeros((len(items), 26))
        for i, item in enumerate(items):
            try:
                samples = self._samples(item["file"])
                data[i] = mfcc_span_descriptor(samples, float(item["start"]), float(item["end"]))
            except Exception as exc:
                errors.append({"index": i, "error": str(exc)})
        return data, "mfcc-fallback", errors


class VisualBackend:
    def __init__(self, allow_primary: bool = True):
        self._primary = _LazyPrimary("visual", _load_clip) if allow_primary else None

    def encode(self, items: list[str]):
        pair = self._primary.get() if self._primary else None
        errors: list[dict] = []
        if pair is not None:
            from PIL import Image

            model, processor = pair
            rows = []
            for i, path in enumerate(items):
                try:
                    with Image.open(path) as img:
                        inputs = processor(images=img.convert("RGB"), return_tensors="pt")
                    rows.append(model.get_image_features(**inputs).detach().numpy()[0])
                except Exception as exc:
                    errors.append({"index": i, "error": str(exc)})
                    rows.append(None)
            dims = next((len(r) for r in rows if r is not None), 1)
            data = np.stack([r if r is not None else np.zeros(dims) for r in rows])
            return data, VISUAL_MODEL, errors

        probe = next((image_vector(p) for p in items if Path(p).exists()), None)
        dims = len(probe) if probe is not None else 280
        data = np.zeros((len(items), dims))
        for i, path in enumerate(items):
            try:
                data[i] = image_vector(path)
            except Exception as exc:
                errors.append({"index": i, "error": str(exc)})
        return data, "texture-color-fallback", errors


class Transcriber:
    def __init__(self, allow_primary: bool = True):
        self._primary = _LazyPrimary("transcribe", _load_whisper) if allow_primary else None

    def transcribe(self, path: str):
        """Returns (segments as (start, end, text) triplets, source)."""
        model = self._primary.get() if self._primary else None
        if model is not None:
            result = model(path)
            segments = []
            for chunk in result.get("chunks", []):
                a, b = chunk["timestamp"]
                if a is None or b is None or not b > a:
                    continue
                segments.append((float(a), float(b), chunk["text"].strip()))
            return segments, ASR_MODEL
        samples = load_wav_mono_16k(path)
        spans = energy_segments(samples)
        return [(a, b, "") for a, b in spans], "energy-vad-fallback"


class BackendRegistry:
    """One backend per modality; `disable_primary` forces fallbacks."""

    def __init__(self, disable_primary: frozenset[str] = frozenset()):
        self.text = TextBackend(allow_primary="text" not in disable_primary)
        self.audio = AudioBackend(allow_primary="audio" not in disable_primary)
        self.visual = VisualBackend(allow_primary="visual" not in disable_primary)
        self.transcriber = Transcriber(allow_primary="transcribe" not in disable_primary)
