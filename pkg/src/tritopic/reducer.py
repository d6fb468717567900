"""Deterministic dimensionality reduction for the clustering stage.

The reduction is a principal-component projection on L2-normalized rows
(cosine geometry) with a fixed sign convention, kept behind a small callable
interface so a neighbor-graph reducer can be swapped in.
"""

from __future__ import annotations

import logging

import numpy as np

log = logging.getLogger(__name__)


def l2_normalize_rows(X: np.ndarray) -> np.ndarray:
    """Unit-normalize each row; zero rows stay zero."""
    X = np.asarray(X, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    return np.divide(X, norms, out=np.zeros_like(X), where=norms > 0)


def principal_axes(X: np.ndarray, components: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigendecomposition of the row-normalized, centered data.

    Returns (mean, axes, eigenvalues) with axes as columns, eigenvalues
    descending, and each axis flipped so its largest-magnitude loading is
    positive (deterministic sign).
    """
    Xn = l2_normalize_rows(X)
    mean = Xn.mean(axis=0)
    centered = Xn - mean
    cov = centered.T @ centered / max(1, Xn.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals, kind="stable")[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    for j in range(eigvecs.shape[1]):
        pivot = int(np.argmax(np.abs(eigvecs[:, j])))
        if eigvecs[pivot, j] < 0:
            eigvecs[:, j] = -eigvecs[:, j]
    _ = components  # axes are computed in full; the caller slices
    return mean, eigvecs, eigvals


def reduce_embeddings(X: np.ndarray, components: int) -> np.ndarray:
    """Project row-normalized embeddings onto the top principal components.

    When fewer than `components` dimensions are supported (small N or d), the
    projection shrinks to what the data can carry, with a warning.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    effective = min(components, d, max(1, n - 1))
    if n == 0:
        return np.zeros((0, effective))
    if effective < components:
        log.warning(
            "reducing %dx%d matrix to %d components instead of %d", n, d, effective, components
        )
    mean, axes, _ = principal_axes(X, effective)
    return (l2_normalize_rows(X) - mean) @ axes[:, :effective]
