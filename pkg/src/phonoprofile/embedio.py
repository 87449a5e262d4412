"""Frame-embedding and phone-token file formats, plus interval pooling.

Two little-endian binary formats:

FRM1 (frame matrix)
    magic "FRM1" | u32 version=1 | u32 dim | f64 hop_seconds | u64 frame_count
    followed by frame_count * dim IEEE-754 float32 values, row-major.

PET1 (phone embedding table)
    magic "PET1" | u32 version=1 | u32 dim | u64 record_count
    each record: u16-length-prefixed UTF-8 speaker_id, utterance_id, phone;
    f64 start, f64 end; u32 position_index; dim float32 values.

Embeddings are stored at 32-bit precision; all arithmetic downstream of
the readers runs at 64-bit.  Writers reject non-finite values so a file on
disk is always fully usable.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    DimMismatch,
    EmptyFrameMatrix,
    IntervalOutOfRange,
    NonFiniteData,
    StringTooLong,
    TruncatedFile,
    UnsupportedVersion,
)
from .textgrid import PhoneInterval

FRM_MAGIC = b"FRM1"
PET_MAGIC = b"PET1"
_VERSION = 1


@dataclass
class FrameMatrix:
    """Frame-level embeddings at a fixed hop; frame f is centred at (f + 0.5) * hop."""

    hop: float
    frames: np.ndarray  # (frame_count, dim) float32

    def __post_init__(self):
        self.frames = np.ascontiguousarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 2:
            raise ValueError("frames must be a 2-D matrix")
        if self.dim < 1:
            raise ValueError("embedding dim must be >= 1")
        if not self.hop > 0:
            raise ValueError("hop must be positive")

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    def centre_times(self) -> np.ndarray:
        return (np.arange(self.frame_count, dtype=np.float64) + 0.5) * self.hop


@dataclass
class PhoneToken:
    """One aligned phone occurrence with its pooled embedding."""

    speaker_id: str
    utterance_id: str
    phone: str
    start: float
    end: float
    embedding: np.ndarray
    position_index: int = 0

    def __post_init__(self):
        self.embedding = np.asarray(self.embedding, dtype=np.float32).reshape(-1)

    @property
    def duration(self) -> float:
        return self.end - self.start


def pool_phone_embedding(frames: FrameMatrix, interval: PhoneInterval) -> np.ndarray:
    """Mean of the frames whose centre time falls inside [start, end).

    If no frame centre lands inside the interval, the single frame whose
    centre is nearest to the interval midpoint is used instead.  Returns a
    float64 vector.
    """
    if frames.frame_count == 0:
        raise EmptyFrameMatrix("frame matrix has no frames")
    audio_end = frames.frame_count * frames.hop
    if interval.start > audio_end + frames.hop:
        raise IntervalOutOfRange(
            f"interval start {interval.start:.4f}s is beyond audio end "
            f"{audio_end:.4f}s by more than one hop")
    centres = frames.centre_times()
    mask = (centres >= interval.start) & (centres < interval.end)
    if mask.any():
        return frames.frames[mask].astype(np.float64).mean(axis=0)
    midpoint = 0.5 * (interval.start + interval.end)
    nearest = int(np.argmin(np.abs(centres - midpoint)))
    return frames.frames[nearest].astype(np.float64)


# --- low-level I/O helpers ---

def _as_binary_sink(sink):
    if hasattr(sink, "write"):
        return sink, False
    return open(Path(sink), "wb"), True


def _as_binary_source(source):
    if hasattr(source, "read"):
        return source, False
    return open(Path(source), "rb"), True


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise TruncatedFile(f"expected {n} bytes for {what}, got {len(data)}")
    return data


def _check_finite(array: np.ndarray, what: str) -> None:
    if array.size and not np.isfinite(array).all():
        raise NonFiniteData(f"{what} contains NaN or Inf values")


def _write_str(fh, value: str, what: str) -> None:
    raw = value.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise StringTooLong(f"{what} exceeds 65535 UTF-8 bytes")
    fh.write(struct.pack("<H", len(raw)))
    fh.write(raw)


def _read_str(fh, what: str) -> str:
    (n,) = struct.unpack("<H", _read_exact(fh, 2, f"{what} length"))
    return _read_exact(fh, n, what).decode("utf-8")


# --- FRM1 ---

def write_frames(frames: FrameMatrix, sink) -> None:
    _check_finite(frames.frames, "frame matrix")
    fh, owned = _as_binary_sink(sink)
    try:
        fh.write(FRM_MAGIC)
        fh.write(struct.pack("<IIdQ", _VERSION, frames.dim, frames.hop, frames.frame_count))
        fh.write(frames.frames.astype("<f4").tobytes(order="C"))
    finally:
        if owned:
            fh.close()


def read_frames(source) -> FrameMatrix:
    fh, owned = _as_binary_source(source)
    try:
        magic = _read_exact(fh, 4, "magic")
        if magic != FRM_MAGIC:
            raise BadMagic(f"expected FRM1 magic, got {magic!r}")
        version, dim, hop, count = struct.unpack("<IIdQ", _read_exact(fh, 24, "FRM1 header"))
        if version != _VERSION:
            raise UnsupportedVersion(f"FRM1 version {version} not supported")
        payload = fh.read(count * dim * 4 + 1)
        if len(payload) < count * dim * 4:
            raise TruncatedFile(
                f"FRM1 payload short: expected {count * dim * 4} bytes, got {len(payload)}")
        if len(payload) > count * dim * 4:
            raise DimMismatch("FRM1 payload longer than header declares")
        data = np.frombuffer(payload, dtype="<f4").reshape(count, dim)
        return FrameMatrix(hop=hop, frames=data.copy())
    finally:
        if owned:
            fh.close()


# --- PET1 ---

def write_tokens(tokens: list[PhoneToken], sink, dim: int | None = None) -> None:
    """Write tokens in order; all embeddings must share one dim."""
    if dim is None:
        if not tokens:
            raise DimMismatch("cannot infer dim for an empty token table; pass dim=")
        dim = tokens[0].embedding.shape[0]
    for tok in tokens:
        if tok.embedding.shape[0] != dim:
            raise DimMismatch(
                f"token {tok.speaker_id}/{tok.utterance_id}/{tok.phone} has dim "
                f"{tok.embedding.shape[0]}, table dim is {dim}")
        _check_finite(tok.embedding, "token embedding")
        if not (np.isfinite(tok.start) and np.isfinite(tok.end)):
            raise NonFiniteData("token start/end must be finite")
    fh, owned = _as_binary_sink(sink)
    try:
        fh.write(PET_MAGIC)
        fh.write(struct.pack("<IIQ", _VERSION, dim, len(tokens)))
        for tok in tokens:
            _write_str(fh, tok.speaker_id, "speaker_id")
            _write_str(fh, tok.utterance_id, "utterance_id")
            _write_str(fh, tok.phone, "phone")
            fh.write(struct.pack("<ddI", tok.start, tok.end, tok.position_index))
            fh.write(tok.embedding.astype("<f4").tobytes(order="C"))
    finally:
        if owned:
            fh.close()


def read_tokens(source) -> list[PhoneToken]:
    fh, owned = _as_binary_source(source)
    try:
        magic = _read_exact(fh, 4, "magic")
        if magic != PET_MAGIC:
            raise BadMagic(f"expected PET1 magic, got {magic!r}")
        version, dim, count = struct.unpack("<IIQ", _read_exact(fh, 16, "PET1 header"))
        if version != _VERSION:
            raise UnsupportedVersion(f"PET1 version {version} not supported")
        tokens = []
        for _ in range(count):
            speaker = _read_str(fh, "speaker_id")
            utterance = _read_str(fh, "utterance_id")
            phone = _read_str(fh, "phone")
            start, end, position = struct.unpack("<ddI", _read_exact(fh, 20, "token header"))
            emb = np.frombuffer(_read_exact(fh, dim * 4, "embedding"), dtype="<f4")
            tokens.append(PhoneToken(speaker, utterance, phone, start, end, emb.copy(), position))
        if fh.read(1):
            raise DimMismatch("PET1 payload longer than header declares")
        return tokens
    finally:
        if owned:
            fh.close()


def tokens_from_alignment(
    speaker_id: str,
    utterance_id: str,
    intervals: list[PhoneInterval],
    frames: FrameMatrix,
) -> list[PhoneToken]:
    """Pool each aligned interval into a PhoneToken, positions in temporal order."""
    tokens = []
    for position, iv in enumerate(sorted(intervals, key=lambda v: v.start)):
        emb = pool_phone_embedding(frames, iv)
        tokens.append(PhoneToken(
            speaker_id, utterance_id, iv.phone, iv.start, iv.end,
            emb.astype(np.float32), position))
    return tokens
