"""Per-language phone-class mappings and severity label handling."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from importlib import resources

from .errors import (
    EmptyFeatureClass,
    MissingFeature,
    OutOfRange,
    OverlappingClasses,
    SchemaError,
    UnknownFeatureName,
)

CONSONANT_FEATURES = ("nasality", "voicing", "stridency", "sonorance", "manner")
VOWEL_FEATURES = ("high", "low", "back", "round")
ALL_FEATURES = CONSONANT_FEATURES + VOWEL_FEATURES

FEATURE_CATEGORY = {name: "consonant" for name in CONSONANT_FEATURES}
FEATURE_CATEGORY.update({name: "vowel" for name in VOWEL_FEATURES})

POSITIVE = "positive"
NEGATIVE = "negative"
NEITHER = "neither"

#: Diacritics stripped by the optional normalisation pass: length marks and
#: primary/secondary stress, in both IPA and ASCII renderings.
_STRIP_CHARS = "ːˑˈˌ:'ːˑ"


class Severity(enum.Enum):
    CONTROL = 0
    MILD = 1
    MODERATE = 2
    SEVERE = 3

    @property
    def ordinal(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Severity":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise SchemaError(
                f"unknown severity label {label!r}; expected one of "
                f"{[s.label for s in cls]}") from None


def map_intelligibility(pct: float) -> Severity:
    """Map an intelligibility percentage onto the four severity bands.

    Band upper bounds are inclusive (>94 control, 85-94 mild, 70-84
    moderate, below that severe); the profound band is merged into severe.
    """
    if not 0.0 <= pct <= 100.0:
        raise OutOfRange(f"intelligibility must be in [0, 100], got {pct}")
    if pct > 94.0:
        return Severity.CONTROL
    if pct >= 85.0:
        return Severity.MILD
    if pct >= 70.0:
        return Severity.MODERATE
    return Severity.SEVERE


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    category: str
    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self):
        if self.name not in ALL_FEATURES:
            raise UnknownFeatureName(f"unknown feature name {self.name!r}")
        if not self.positive or not self.negative:
            raise EmptyFeatureClass(f"feature {self.name!r} has an empty phone class")
        overlap = self.positive & self.negative
        if overlap:
            raise OverlappingClasses(
                f"feature {self.name!r}: phones in both classes: {sorted(overlap)}")


def normalize_phone(phone: str) -> str:
    """Strip length marks and stress diacritics from a phone symbol."""
    return "".join(ch for ch in phone if ch not in _STRIP_CHARS)


def classify_token(phone: str, spec: FeatureSpec, normalize: bool = False) -> str:
    """Return POSITIVE, NEGATIVE or NEITHER for a phone symbol."""
    if normalize:
        phone = normalize_phone(phone)
    if phone in spec.positive:
        return POSITIVE
    if phone in spec.negative:
        return NEGATIVE
    return NEITHER


@dataclass
class LanguageConfig:
    language: str
    features: dict[str, FeatureSpec]
    corner_vowels: dict[str, frozenset[str]]
    silence_labels: frozenset[str] = frozenset({"", "sil", "sp", "spn", "<eps>"})
    normalize_diacritics: bool = False
    notes: str = ""

    def feature(self, name: str) -> FeatureSpec:
        if name not in self.features:
            raise UnknownFeatureName(f"unknown feature name {name!r}")
        return self.features[name]

    def consonant_features(self) -> list[FeatureSpec]:
        return [self.features[n] for n in CONSONANT_FEATURES]

    def vowel_features(self) -> list[FeatureSpec]:
        return [self.features[n] for n in VOWEL_FEATURES]


def load_language_config(content: str | bytes | dict) -> LanguageConfig:
    """Load and validate a language config from its JSON document.

    Expected shape::

        {"language": "english",
         "silence": ["", "sil", ...],
         "corner_vowels": {"i": [...], "a": [...], "u": [...]},
         "features": {"nasality": {"positive": [...], "negative": [...]}, ...},
         "normalize_diacritics": false}
    """
    if isinstance(content, (str, bytes)):
        try:
            doc = json.loads(content)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"language config is not valid JSON: {exc}") from exc
    else:
        doc = content
    if not isinstance(doc, dict):
        raise SchemaError("language config must be a JSON object")

    language = doc.get("language")
    if not language:
        raise SchemaError("language config is missing the 'language' key")

    raw_features = doc.get("features")
    if not isinstance(raw_features, dict):
        raise SchemaError("language config is missing the 'features' mapping")
    for name in raw_features:
        if name not in ALL_FEATURES:
            raise UnknownFeatureName(
                f"unknown feature name {name!r}; expected one of {list(ALL_FEATURES)}")
    features = {}
    for name in ALL_FEATURES:
        if name not in raw_features:
            raise MissingFeature(f"language config is missing feature {name!r}")
        entry = raw_features[name]
        if not isinstance(entry, dict) or "positive" not in entry or "negative" not in entry:
            raise SchemaError(f"feature {name!r} needs 'positive' and 'negative' arrays")
        features[name] = FeatureSpec(
            name=name,
            category=FEATURE_CATEGORY[name],
            positive=frozenset(entry["positive"]),
            negative=frozenset(entry["negative"]),
        )

    corners_raw = doc.get("corner_vowels")
    if not isinstance(corners_raw, dict):
        raise SchemaError("language config is missing the 'corner_vowels' mapping")
    corners = {}
    for key in ("i", "a", "u"):
        phones = corners_raw.get(key)
        if not phones:
            raise SchemaError(f"corner_vowels.{key} must be a non-empty array")
        corners[key] = frozenset(phones)

    silence = doc.get("silence")
    kwargs = {}
    if silence is not None:
        kwargs["silence_labels"] = frozenset(silence)
    return LanguageConfig(
        language=language,
        features=features,
        corner_vowels=corners,
        normalize_diacritics=bool(doc.get("normalize_diacritics", False)),
        notes=str(doc.get("notes", "")),
        **kwargs,
    )


def default_english_config() -> LanguageConfig:
    """The bundled English mapping (covers common MFA and ASCII symbols)."""
    data = resources.files("phonoprofile").joinpath("data/english.json").read_text("utf-8")
    return load_language_config(data)
