"""Audio loading and 16 kHz mono preprocessing.

No amplitude normalisation, silence trimming, or noise reduction is
applied; the only transformations are channel averaging and sample-rate
conversion with a polyphase windowed-sinc resampler
(scipy.signal.resample_poly, Kaiser window).
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.io.wavfile
import scipy.signal

from .errors import AudioDecodeError

TARGET_RATE = 16_000

#: Integer PCM full-scale values for float conversion.
_PCM_SCALE = {np.dtype(np.int16): 32768.0, np.dtype(np.int32): 2147483648.0,
              np.dtype(np.uint8): 128.0}


def load_wav(path) -> tuple[int, np.ndarray]:
    """Read a WAV file to float64 samples in [-1, 1], shape (n,) or (n, ch)."""
    path = Path(path)
    try:
        rate, data = scipy.io.wavfile.read(path)
    except (ValueError, OSError) as exc:
        raise AudioDecodeError(f"cannot read {path}: {exc}") from exc
    if data.size == 0:
        raise AudioDecodeError(f"{path} contains no samples")
    if data.dtype in _PCM_SCALE:
        offset = 128.0 if data.dtype == np.uint8 else 0.0
        data = (data.astype(np.float64) - offset) / _PCM_SCALE[data.dtype]
    else:
        data = data.astype(np.float64)
    return rate, data


def to_mono_16k(rate: int, samples: np.ndarray) -> np.ndarray:
    """Average channels, then resample to 16 kHz."""
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if samples.size == 0:
        raise AudioDecodeError("empty audio after channel averaging")
    if rate == TARGET_RATE:
        return samples
    ratio = Fraction(TARGET_RATE, int(rate))
    return scipy.signal.resample_poly(samples, ratio.numerator, ratio.denominator)


def load_audio_16k(path) -> np.ndarray:
    rate, samples = load_wav(path)
    return to_mono_16k(rate, samples)
