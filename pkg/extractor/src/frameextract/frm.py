"""FRM1 frame-embedding file writer/reader.

Byte layout (little-endian):
    magic "FRM1" | u32 version=1 | u32 dim | f64 hop_seconds
    | u64 frame_count | frame_count * dim float32, row-major

Implemented against the published byte spec so files interoperate with
any FRM1 consumer.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"FRM1"
VERSION = 1
_HEADER = struct.Struct("<IIdQ")


def write_frm(path, hop: float, frames: np.ndarray) -> None:
    frames = np.ascontiguousarray(frames, dtype=np.float32)
    if frames.ndim != 2:
        raise ValueError("frames must be 2-D (frame_count x dim)")
    if not np.isfinite(frames).all():
        raise ValueError("frames contain NaN or Inf")
    with open(Path(path), "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(VERSION, frames.shape[1], float(hop), frames.shape[0]))
        fh.write(frames.astype("<f4").tobytes(order="C"))


def read_frm(path) -> tuple[float, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not an FRM1 file")
    version, dim, hop, count = _HEADER.unpack_from(raw, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported FRM1 version {version}")
    payload = raw[4 + _HEADER.size:]
    if len(payload) != count * dim * 4:
        raise ValueError(f"{path}: payload length mismatch")
    frames = np.frombuffer(payload, dtype="<f4").reshape(count, dim)
    return hop, frames.copy()


def is_valid_frm(path, dim: int | None = None) -> bool:
    """Cheap validity probe used for idempotent batch reruns."""
    try:
        hop, frames = read_frm(path)
    except (OSError, ValueError):
        return False
    return dim is None or frames.shape[1] == dim
