"""HTTP client for encoder endpoints that speak the EMB1 wire format."""

from __future__ import annotations

import logging
import time
from typing import Callable

import requests

from .corpus import EmbeddingMatrix, parse_emb1
from .errors import AlignmentError, StageError

log = logging.getLogger(__name__)

RETRY_ATTEMPTS = 3
BACKOFF_BASE_SECONDS = 0.2


def fetch_embeddings(
    endpoint: str,
    payload: dict,
    expected_rows: int,
    timeout: float = 60.0,
    sleep: Callable[[float], None] = time.sleep,
) -> EmbeddingMatrix:
    """POST a JSON payload and parse the EMB1 response body.

    Transient failures retry with exponential backoff (3 attempts total);
    a row-count mismatch is a hard alignment error, never retried.
    """
    last_error: Exception | None = None
    for attempt in range(RETRY_ATTEMPTS):
        if attempt:
            sleep(BACKOFF_BASE_SECONDS * 2 ** (attempt - 1))
        try:
            response = requests.post(endpoint, json=payload, timeout=timeout)
            response.raise_for_status()
        except requests.RequestException as exc:
            last_error = exc
            log.warning("embedding fetch attempt %d/%d failed: %s", attempt + 1, RETRY_ATTEMPTS, exc)
            continue
        matrix = parse_emb1(response.content, source_name=endpoint)
        if matrix.rows != expected_rows:
            raise AlignmentError(
                f"{endpoint}: expected {expected_rows} rows, got {matrix.rows}"
            )
        return matrix
    raise StageError(f"embedding endpoint {endpoint} failed after {RETRY_ATTEMPTS} attempts: {last_error}")
