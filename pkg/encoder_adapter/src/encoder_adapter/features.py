"""Deterministic fallback feature extractors for text and images."""

from __future__ import annotations

import hashlib
import re
from pathlib import Path

import numpy as np
from PIL import Image

TEXT_DIMS = 256
PATCH = 16
HIST_BINS = 8

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


def hashed_text_vector(text: str, dims: int = TEXT_DIMS) -> np.ndarray:
    """Signed hashed bag-of-words, L2-normalized; stable across processes."""
    vec = np.zeros(dims)
    for token in _TOKEN_RE.findall(text.lower()):
        digest = hashlib.md5(token.encode("utf-8")).digest()
        index = int.from_bytes(digest[:4], "little") % dims
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        vec[index] += sign
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


def image_vector(path: str | Path) -> np.ndarray:
    """Grayscale patch + RGB histogram descriptor, L2-normalized."""
    with Image.open(path) as img:
        rgb = np.asarray(img.convert("RGB"))
    gray = rgb.mean(axis=2)
    patch = np.asarray(
        Image.fromarray(gray.astype(np.uint8)).resize((PATCH, PATCH), Image.BILINEAR),
        dtype=np.float64,
    ) / 255.0
    hists = []
    for ch in range(3):
        h, _ = np.histogram(rgb[:, :, ch], bins=HIST_BINS, range=(0, 256))
        hists.append(h / max(1, h.sum()))
    vec = np.concatenate([patch.ravel()] + hists)
    return vec / np.linalg.norm(vec)
