"""EMB1 wire format writer.

One JSON header line, then row-major little-endian float32. Extra header
fields (like the per-item error trailer) are legal: consumers read the keys
they know.
"""

from __future__ import annotations

import json

import numpy as np


def emb1_body(
    data: np.ndarray,
    modality: str,
    source: str,
    errors: list[dict] | None = None,
) -> bytes:
    data = np.ascontiguousarray(data, dtype=np.float32)
    if data.ndim != 2:
        raise ValueError(f"EMB1 payload must be 2-D, got shape {data.shape}")
    header = {
        "magic": "EMB1",
        "count": int(data.shape[0]),
        "dims": int(data.shape[1]),
        "dtype": "f32le",
        "modality": modality,
        "source": source,
    }
    if errors:
        header["errors"] = errors
    return json.dumps(header, separators=(",", ":")).encode() + b"\n" + data.tobytes()
