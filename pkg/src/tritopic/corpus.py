"""Segment and embedding ingestion: JSON-lines transcripts, EMB1 matrices, per-video corpus."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AlignmentError, DataError, ParseError, ValidationError

log = logging.getLogger(__name__)

MODALITIES = ("text", "audio", "visual", "fused", "word")

EMB1_MAGIC = "EMB1"
EMB1_DTYPE = "f32le"
# Canonical header key order; writers always emit this order so that
# load -> write round-trips canonical files byte-identically.
_HEADER_KEYS = ("magic", "count", "dims", "dtype", "modality", "source")


@dataclass(frozen=True)
class Segment:
    """One ASR-aligned unit of a video."""

    video_id: str
    index: int
    t_start: float
    t_end: float
    text: str

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValidationError(
                f"segment {self.index} of {self.video_id!r}: "
                f"t_end ({self.t_end}) must exceed t_start ({self.t_start})"
            )

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass
class EmbeddingMatrix:
    """Row-aligned float32 matrix for one modality, with provenance."""

    modality: str
    data: np.ndarray
    source: str = "synthetic"

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ValidationError(f"unknown modality {self.modality!r}")
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 2:
            raise DataError(f"embedding matrix must be 2-D, got shape {self.data.shape}")
        bad = ~np.isfinite(self.data)
        if bad.any():
            row = int(np.argwhere(bad.any(axis=1))[0][0])
            raise DataError(f"non-finite value in {self.modality} matrix at row {row}")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> int:
        return self.data.shape[1]


@dataclass
class VideoCorpus:
    """Aligned segments plus attached modality matrices for one video."""

    video_id: str
    segments: list[Segment]
    matrices: dict[str, EmbeddingMatrix] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.segments)

    def matrix(self, modality: str) -> EmbeddingMatrix:
        if modality not in self.matrices:
            raise KeyError(f"{self.video_id}: no {modality!r} matrix attached")
        return self.matrices[modality]


def load_segments(path: str | Path, video_id: str = "") -> list[Segment]:
    """Parse a JSON-lines segment file (fields: start, end, text).

    Segments come back sorted by (t_start, t_end) with indices reassigned
    0..N-1. Overlapping spans are accepted with a warning; end <= start is
    rejected.
    """
    path = Path(path)
    video_id = video_id or path.parent.name or path.stem
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                start = float(obj["start"])
                end = float(obj["end"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: malformed segment line ({exc})") from exc
            if not end > start:
                raise ValidationError(
                    f"{path}:{lineno}: segment end ({end}) must exceed start ({start})"
                )
            records.append((start, end, str(obj.get("text", ""))))

    records.sort(key=lambda r: (r[0], r[1]))
    segments = [
        Segment(video_id=video_id, index=i, t_start=s, t_end=e, text=t)
        for i, (s, e, t) in enumerate(records)
    ]
    for prev, cur in zip(segments, segments[1:]):
        if cur.t_start < prev.t_end:
            log.warning(
                "%s: segments %d and %d overlap (%.3f < %.3f)",
                video_id, prev.index, cur.index, cur.t_start, prev.t_end,
            )
    return segments


def parse_emb1(raw: bytes, source_name: str = "<bytes>") -> EmbeddingMatrix:
    """Decode an EMB1 body: JSON header line + row-major little-endian float32."""
    nl = raw.find(b"\n")
    if nl < 0:
        raise ParseError(f"{source_name}: missing EMB1 header line")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{source_name}:1: malformed EMB1 header ({exc})") from exc
    if header.get("magic") != EMB1_MAGIC:
        raise ParseError(f"{source_name}: bad magic {header.get('magic')!r}")
    if header.get("dtype") != EMB1_DTYPE:
        raise ParseError(f"{source_name}: unsupported dtype {header.get('dtype')!r}")
    try:
        count = int(header["count"])
        dims = int(header["dims"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{source_name}: header missing count/dims") from exc
    if count < 0 or dims < 1:
        raise ParseError(f"{source_name}: invalid count={count} dims={dims}")

    payload = raw[nl + 1:]
    expected = count * dims * 4
    if len(payload) != expected:
        raise ParseError(
            f"{source_name}: payload is {len(payload)} bytes, header implies {expected}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(count, dims)
    bad = ~np.isfinite(data)
    if bad.any():
        row = int(np.argwhere(bad.any(axis=1))[0][0])
        raise DataError(f"{source_name}: non-finite value at row {row}")
    return EmbeddingMatrix(
        modality=str(header.get("modality", "text")),
        data=data,
        source=str(header.get("source", "unknown")),
    )


def emb1_bytes(matrix: EmbeddingMatrix) -> bytes:
    """Serialize a matrix to the canonical EMB1 byte form."""
    header = {
        "magic": EMB1_MAGIC,
        "count": matrix.rows,
        "dims": matrix.dims,
        "dtype": EMB1_DTYPE,
        "modality": matrix.modality,
        "source": matrix.source,
    }
    line = json.dumps({k: header[k] for k in _HEADER_KEYS}, separators=(",", ":"))
    return line.encode("utf-8") + b"\n" + matrix.data.astype("<f4").tobytes()


def load_embeddings(
    path: str | Path,
    expected_rows: int,
    modality: str | None = None,
) -> EmbeddingMatrix:
    """Load an EMB1 file (or CSV fallback) and check row alignment.

    CSV files carry no modality metadata, so `modality` is required for them;
    for EMB1 it overrides the header when given.
    """
    path = Path(path)
    raw = path.read_bytes()
    if raw[:1] == b"{":
        matrix = parse_emb1(raw, source_name=str(path))
        if modality is not None:
            matrix.modality = modality
    else:
        matrix = _parse_csv(raw, path, modality)
    if matrix.rows != expected_rows:
        raise AlignmentError(
            f"{path}: expected {expected_rows} rows, found {matrix.rows}"
        )
    return matrix


def write_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    Path(path).write_bytes(emb1_bytes(matrix))


def _parse_csv(raw: bytes, path: Path, modality: str | None) -> EmbeddingMatrix:
    if modality is None:
        raise ValidationError(f"{path}: CSV embeddings need an explicit modality")
    rows = []
    width = None
    for lineno, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            values = [float(v) for v in line.split(",")]
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: malformed CSV row ({exc})") from exc
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(f"{path}:{lineno}: expected {width} columns, got {len(values)}")
        rows.append(values)
    data = np.asarray(rows, dtype=np.float32).reshape(len(rows), width or 0)
    return EmbeddingMatrix(modality=modality, data=data, source="csv")


def attach(corpus: VideoCorpus, matrix: EmbeddingMatrix) -> VideoCorpus:
    """Attach a matrix to the corpus; re-attaching a modality replaces it."""
    if matrix.modality != "word" and matrix.rows != len(corpus.segments):
        raise AlignmentError(
            f"{corpus.video_id}: {matrix.modality} matrix has {matrix.rows} rows, "
            f"corpus has {len(corpus.segments)} segments"
        )
    corpus.matrices[matrix.modality] = matrix
    return corpus
