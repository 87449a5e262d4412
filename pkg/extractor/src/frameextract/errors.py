class FrameExtractError(Exception):
    """Base class for extractor errors."""


class AudioDecodeError(FrameExtractError):
    pass


class ModelLoadError(FrameExtractError):
    pass


class BadManifest(FrameExtractError):
    pass
