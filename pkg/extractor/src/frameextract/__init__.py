"""Frame-embedding extraction from audio with frozen speech encoders."""

from .audio import load_audio_16k, to_mono_16k
from .extract import ExtractionJob, FrameEncoder, batch_extract, extract
from .frm import read_frm, write_frm

__version__ = "0.1.0"

__all__ = [
    "ExtractionJob",
    "FrameEncoder",
    "batch_extract",
    "extract",
    "load_audio_16k",
    "read_frm",
    "to_mono_16k",
    "write_frm",
]
