"""FastAPI service: POST /transcribe plus POST /embed/{text|audio|visual}.

Embedding responses are EMB1 bodies (application/octet-stream); transcription
responds with JSON lines of (start, end, text). The backend that actually
produced a response is recorded in the EMB1 header's source field and the
X-Encoder-Source response header.
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from .backends import BackendRegistry
from .emb1 import emb1_body

log = logging.getLogger(__name__)

MODALITIES = ("text", "audio", "visual")


class TranscribeRequest(BaseModel):
    path: str


class EmbedRequest(BaseModel):
    modality: str | None = None
    items: list


def _validate_items(modality: str, items: list) -> None:
    if modality == "text":
        ok = all(isinstance(i, str) for i in items)
    elif modality == "audio":
        ok = all(
            isinstance(i, dict) and {"file", "start", "end"} <= set(i) for i in items
        )
    else:
        ok = all(isinstance(i, str) for i in items)
    if not ok:
        raise HTTPException(status_code=422, detail=f"items are not valid for {modality!r}")


def create_app(disable_primary: frozenset[str] = frozenset()) -> FastAPI:
    app = FastAPI(title="encoder-adapter")
    registry = BackendRegistry(disable_primary=frozenset(disable_primary))

    @app.post("/transcribe")
    def transcribe(request: TranscribeRequest) -> Response:
        if not Path(request.path).exists():
            raise HTTPException(status_code=400, detail=f"unreadable media: {request.path}")
        try:
            segments, source = registry.transcriber.transcribe(request.path)
        except Exception as exc:
            raise HTTPException(status_code=400, detail=f"unreadable media: {exc}") from exc
        lines = "".join(
            json.dumps({"start": a, "end": b, "text": t}, separators=(",", ":")) + "\n"
            for a, b, t in segments
        )
        return Response(
            content=lines,
            media_type="application/x-ndjson",
            headers={"X-Encoder-Source": source},
        )

    @app.post("/embed/{modality}")
    def embed(modality: str, request: EmbedRequest) -> Response:
        if modality not in MODALITIES:
            raise HTTPException(status_code=404, detail=f"unknown modality {modality!r}")
        if request.modality is not None and request.modality != modality:
            raise HTTPException(
                status_code=422,
                detail=f"body modality {request.modality!r} does not match path",
            )
        _validate_items(modality, request.items)
        backend = getattr(registry, modality)
        data, source, errors = backend.encode(request.items)
        body = emb1_body(data, modality=modality, source=source, errors=errors)
        return Response(
            content=body,
            media_type="application/octet-stream",
            headers={"X-Encoder-Source": source},
        )

    return app


def default_app() -> FastAPI:
    """App factory honoring ENCODER_DISABLE_PRIMARY=text,audio,... for serving."""
    disabled = frozenset(
        p.strip() for p in os.environ.get("ENCODER_DISABLE_PRIMARY", "").split(",") if p.strip()
    )
    return create_app(disable_primary=disabled)
