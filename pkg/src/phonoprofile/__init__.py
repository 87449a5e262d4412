"""Training-free phonological contrast profiling of speech embeddings."""

from .embedio import (
    FrameMatrix,
    PhoneToken,
    pool_phone_embedding,
    read_frames,
    read_tokens,
    write_frames,
    write_tokens,
)
from .featconfig import (
    FeatureSpec,
    LanguageConfig,
    Severity,
    classify_token,
    default_english_config,
    load_language_config,
    map_intelligibility,
)
from .manifest import CorpusManifest, load_manifest
from .profiles import (
    DPrimeResult,
    FeatureDirection,
    SpeakerProfile,
    boundary_sharpness,
    compute_direction,
    cross_position_cosim,
    dprime,
    filter_short_tokens,
    speaker_profile,
    subsampled_dprime,
    vowel_triangle_area,
)
from .textgrid import (
    PhoneInterval,
    TextGrid,
    Tier,
    extract_phone_intervals,
    format_textgrid,
    parse_textgrid,
)

__version__ = "0.1.0"

__all__ = [
    "CorpusManifest",
    "DPrimeResult",
    "FeatureDirection",
    "FeatureSpec",
    "FrameMatrix",
    "LanguageConfig",
    "PhoneInterval",
    "PhoneToken",
    "Severity",
    "SpeakerProfile",
    "TextGrid",
    "Tier",
    "boundary_sharpness",
    "classify_token",
    "compute_direction",
    "cross_position_cosim",
    "default_english_config",
    "dprime",
    "extract_phone_intervals",
    "filter_short_tokens",
    "format_textgrid",
    "load_language_config",
    "load_manifest",
    "map_intelligibility",
    "parse_textgrid",
    "pool_phone_embedding",
    "read_frames",
    "read_tokens",
    "speaker_profile",
    "subsampled_dprime",
    "vowel_triangle_area",
    "write_frames",
    "write_tokens",
]
