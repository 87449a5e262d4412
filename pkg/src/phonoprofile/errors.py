"""Exception taxonomy shared across the package."""


class PhonoProfileError(Exception):
    """Base class for all errors raised by this package."""


# --- TextGrid parsing ---

class MalformedTextGrid(PhonoProfileError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class UnsupportedEncoding(PhonoProfileError):
    pass


class EmptyFile(PhonoProfileError):
    pass


class TierNotFound(PhonoProfileError):
    pass


# --- Embedding / token file I/O ---

class BadMagic(PhonoProfileError):
    pass


class UnsupportedVersion(PhonoProfileError):
    pass


class TruncatedFile(PhonoProfileError):
    pass


class DimMismatch(PhonoProfileError):
    pass


class NonFiniteData(PhonoProfileError):
    pass


class StringTooLong(PhonoProfileError):
    pass


class EmptyFrameMatrix(PhonoProfileError):
    pass


class IntervalOutOfRange(PhonoProfileError):
    pass


# --- Language / severity configuration ---

class OverlappingClasses(PhonoProfileError):
    pass


class MissingFeature(PhonoProfileError):
    pass


class UnknownFeatureName(PhonoProfileError):
    pass


class EmptyFeatureClass(PhonoProfileError):
    pass


class OutOfRange(PhonoProfileError):
    pass


# --- Profile computation ---

class InsufficientTokens(PhonoProfileError):
    pass


class DegenerateDirection(PhonoProfileError):
    pass


class ZeroVariance(PhonoProfileError):
    pass


class Ineligible(PhonoProfileError):
    pass


class NoTransitions(PhonoProfileError):
    pass


class NoInteriorTokens(PhonoProfileError):
    pass


class InsufficientCornerTokens(PhonoProfileError):
    pass


# --- Statistics kernel ---

class TooFewPairs(PhonoProfileError):
    pass


class ConstantInput(PhonoProfileError):
    pass


class NearSingular(PhonoProfileError):
    pass


class InvalidP(PhonoProfileError):
    pass


class EmptyGroup(PhonoProfileError):
    pass


class TooFewStudies(PhonoProfileError):
    pass


class DegenerateRho(PhonoProfileError):
    pass


class SingleClass(PhonoProfileError):
    pass


class ClassTooSmall(PhonoProfileError):
    pass


class NonConvergence(PhonoProfileError):
    pass


class OutOfDomain(PhonoProfileError):
    pass


# --- Manifest / pipeline ---

class SchemaError(PhonoProfileError):
    pass


class ConflictingSeverity(PhonoProfileError):
    pass


class DuplicateSpeaker(PhonoProfileError):
    pass


class NoControlsForLanguage(PhonoProfileError):
    pass


class StratumTooSmall(PhonoProfileError):
    pass


class InvalidSpec(PhonoProfileError):
    pass


#: Errors treated as numeric failures by the CLI (exit code 4); everything
#: else under PhonoProfileError is a data/usage problem (exit code 3).
NUMERIC_ERRORS = (
    ZeroVariance,
    DegenerateDirection,
    DegenerateRho,
    NearSingular,
    NonConvergence,
    OutOfDomain,
)
