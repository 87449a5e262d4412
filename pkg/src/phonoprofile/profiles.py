"""Feature directions and per-speaker phonological profiles.

A profile is the 12-metric vector: five consonant and four vowel contrast
separability scores (signal-detection d'), mean cosine similarity across
phone transitions, cross-position cosine similarity for interior phones,
and the corner-vowel triangle area via Heron's formula.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .embedio import PhoneToken
from .errors import (
    DegenerateDirection,
    Ineligible,
    InsufficientCornerTokens,
    InsufficientTokens,
    NoInteriorTokens,
    NoTransitions,
    ZeroVariance,
)
from .featconfig import (
    ALL_FEATURES,
    CONSONANT_FEATURES,
    NEGATIVE,
    POSITIVE,
    VOWEL_FEATURES,
    FeatureSpec,
    LanguageConfig,
    Severity,
    classify_token,
)

STRUCTURAL_METRICS = ("boundary_sharpness", "cross_position_cosim", "vowel_triangle_area")
DPRIME_METRICS = tuple(f"{name}_dprime" for name in ALL_FEATURES)
CONSONANT_DPRIME_METRICS = tuple(f"{name}_dprime" for name in CONSONANT_FEATURES)
VOWEL_DPRIME_METRICS = tuple(f"{name}_dprime" for name in VOWEL_FEATURES)
METRIC_KEYS = DPRIME_METRICS + STRUCTURAL_METRICS

#: Speakers with fewer aligned phone tokens than this are flagged for
#: exclusion from corpus-level analyses (their profile is still computed).
CORPUS_TOKEN_THRESHOLD = 25

MIN_DIRECTION_TOKENS = 5
MIN_CORNER_TOKENS = 3


@dataclass
class FeatureDirection:
    feature: str
    direction: np.ndarray  # unit-norm float64
    n_positive: int
    n_negative: int
    language: str = ""


@dataclass
class DPrimeResult:
    feature: str
    d_prime: float
    mu_pos: float
    mu_neg: float
    pooled_sd: float
    n_pos: int
    n_neg: int


@dataclass
class SpeakerProfile:
    speaker_id: str
    corpus: str
    language: str
    aetiology: str
    role: str
    severity: Severity | None
    metrics: dict[str, float]
    absent: dict[str, str]
    n_phones: int
    n_utterances: int
    excluded: bool = False
    filtered_metrics: dict[str, float] = field(default_factory=dict)
    filtered_absent: dict[str, str] = field(default_factory=dict)

    @property
    def phones_per_utterance(self) -> float:
        if self.n_utterances == 0:
            return 0.0
        return self.n_phones / self.n_utterances

    @property
    def severity_ordinal(self) -> int | None:
        return None if self.severity is None else self.severity.ordinal


def derive_seed(global_seed: int, *parts: str) -> int:
    """Stable 64-bit stream seed from the global seed and string context.

    Hash-based so parallel execution and run-to-run ordering changes do not
    alter per-speaker results.
    """
    digest = hashlib.sha256()
    digest.update(str(int(global_seed)).encode())
    for part in parts:
        digest.update(b"\x1f")
        digest.update(str(part).encode("utf-8"))
    return int.from_bytes(digest.digest()[:8], "little")


def filter_short_tokens(tokens: list[PhoneToken], min_duration: float = 0.030) -> list[PhoneToken]:
    """Drop tokens shorter than min_duration seconds (boundary inclusive)."""
    return [t for t in tokens if t.duration >= min_duration]


def _split_classes(tokens: list[PhoneToken], spec: FeatureSpec,
                   normalize: bool) -> tuple[list[PhoneToken], list[PhoneToken]]:
    pos, neg = [], []
    for tok in tokens:
        side = classify_token(tok.phone, spec, normalize)
        if side == POSITIVE:
            pos.append(tok)
        elif side == NEGATIVE:
            neg.append(tok)
    return pos, neg


def _embedding_matrix(tokens: list[PhoneToken]) -> np.ndarray:
    return np.asarray([t.embedding for t in tokens], dtype=np.float64)


def compute_direction(control_tokens: list[PhoneToken], spec: FeatureSpec,
                      language: str = "", normalize: bool = False,
                      min_tokens: int = MIN_DIRECTION_TOKENS) -> FeatureDirection:
    """Unit-norm difference of class means over pooled healthy-control tokens."""
    pos, neg = _split_classes(control_tokens, spec, normalize)
    if len(pos) < min_tokens or len(neg) < min_tokens:
        raise InsufficientTokens(
            f"feature {spec.name!r}: need >= {min_tokens} control tokens per class, "
            f"got {len(pos)} positive / {len(neg)} negative")
    diff = _embedding_matrix(pos).mean(axis=0) - _embedding_matrix(neg).mean(axis=0)
    norm = float(np.linalg.norm(diff))
    if norm < 1e-12:
        raise DegenerateDirection(f"feature {spec.name!r}: class means coincide")
    return FeatureDirection(spec.name, diff / norm, len(pos), len(neg), language)


def _dprime_from_projections(pos: np.ndarray, neg: np.ndarray) -> tuple[float, float, float, float]:
    mu_p = float(pos.mean())
    mu_n = float(neg.mean())
    n_p, n_n = len(pos), len(neg)
    pooled_var = ((n_p - 1) * pos.var(ddof=1) + (n_n - 1) * neg.var(ddof=1)) / (n_p + n_n - 2)
    pooled_sd = float(np.sqrt(pooled_var))
    if pooled_sd < 1e-12:
        raise ZeroVariance("pooled standard deviation is zero; d' undefined")
    return (mu_p - mu_n) / pooled_sd, mu_p, mu_n, pooled_sd


def dprime(tokens: list[PhoneToken], direction: FeatureDirection, spec: FeatureSpec,
           min_tokens: int = 5, normalize: bool = False) -> DPrimeResult:
    """Separability of one speaker's classes along a feature direction.

    d' = (mu_pos - mu_neg) / s_pooled, with the Bessel-corrected two-sample
    pooled standard deviation (n1 + n2 - 2 degrees of freedom).
    """
    pos, neg = _split_classes(tokens, spec, normalize)
    if len(pos) < min_tokens or len(neg) < min_tokens:
        raise InsufficientTokens(
            f"feature {spec.name!r}: need >= {min_tokens} tokens per class, "
            f"got {len(pos)} positive / {len(neg)} negative")
    proj_pos = _embedding_matrix(pos) @ direction.direction
    proj_neg = _embedding_matrix(neg) @ direction.direction
    d, mu_p, mu_n, sd = _dprime_from_projections(proj_pos, proj_neg)
    return DPrimeResult(spec.name, d, mu_p, mu_n, sd, len(pos), len(neg))


def subsampled_dprime(tokens: list[PhoneToken], direction: FeatureDirection,
                      spec: FeatureSpec, n_per_class: int = 30, reps: int = 100,
                      seed: int = 0, normalize: bool = False) -> float:
    """Mean d' over fixed-size without-replacement class subsamples.

    Equalises the token count entering each estimate so speakers with very
    different amounts of speech become comparable.  Deterministic for a
    given seed; speakers with fewer than n_per_class tokens in either
    class are ineligible.
    """
    pos, neg = _split_classes(tokens, spec, normalize)
    if len(pos) < n_per_class or len(neg) < n_per_class:
        raise Ineligible(
            f"feature {spec.name!r}: need >= {n_per_class} tokens per class for "
            f"subsampling, got {len(pos)} positive / {len(neg)} negative")
    proj_pos = _embedding_matrix(pos) @ direction.direction
    proj_neg = _embedding_matrix(neg) @ direction.direction
    rng = np.random.Generator(np.random.Philox(
        key=np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(0)], dtype=np.uint64)))
    values = np.empty(reps, dtype=np.float64)
    for r in range(reps):
        ip = np.sort(rng.permutation(len(proj_pos))[:n_per_class])
        ineg = np.sort(rng.permutation(len(proj_neg))[:n_per_class])
        values[r], _, _, _ = _dprime_from_projections(proj_pos[ip], proj_neg[ineg])
    return float(values.mean())


def _cosine_rows(e: np.ndarray) -> np.ndarray:
    """Cosines between consecutive rows; rows with zero norm yield NaN."""
    norms = np.linalg.norm(e, axis=1)
    dots = (e[:-1] * e[1:]).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return dots / (norms[:-1] * norms[1:])


def group_tokens_by_utterance(tokens: list[PhoneToken]) -> list[list[PhoneToken]]:
    """Group into utterances ordered by position index within each."""
    by_utt: dict[str, list[PhoneToken]] = {}
    for tok in tokens:
        by_utt.setdefault(tok.utterance_id, []).append(tok)
    utterances = []
    for utt_id in sorted(by_utt):
        utterances.append(sorted(by_utt[utt_id], key=lambda t: (t.position_index, t.start)))
    return utterances


def boundary_sharpness(utterances: list[list[PhoneToken]]) -> float:
    """Mean cosine similarity across consecutive within-utterance phone pairs."""
    sims = []
    for utt in utterances:
        if len(utt) < 2:
            continue
        values = _cosine_rows(_embedding_matrix(utt))
        sims.extend(v for v in values if np.isfinite(v))
    if not sims:
        raise NoTransitions("no utterance contributes a phone transition")
    return float(np.mean(sims))


def cross_position_cosim(utterances: list[list[PhoneToken]]) -> float:
    """Mean over interior phones of their average cosine with both neighbours."""
    values = []
    for utt in utterances:
        if len(utt) < 3:
            continue
        e = _embedding_matrix(utt)
        step = _cosine_rows(e)  # step[i] = cos(e_i, e_{i+1})
        per_token = 0.5 * (step[:-1] + step[1:])  # interior token i+1
        values.extend(v for v in per_token if np.isfinite(v))
    if not values:
        raise NoInteriorTokens("no utterance has an interior phone")
    return float(np.mean(values))


def heron_area(v1: np.ndarray, v2: np.ndarray, v3: np.ndarray) -> float:
    """Triangle area from three vertices via Heron's formula.

    Pairwise Euclidean side lengths a, b, c; semi-perimeter
    s = (a + b + c) / 2; area = sqrt(s (s-a) (s-b) (s-c)), clamped at zero
    for degenerate (collinear) configurations.
    """
    a = float(np.linalg.norm(np.asarray(v1, float) - np.asarray(v2, float)))
    b = float(np.linalg.norm(np.asarray(v2, float) - np.asarray(v3, float)))
    c = float(np.linalg.norm(np.asarray(v3, float) - np.asarray(v1, float)))
    s = (a + b + c) / 2.0
    return float(np.sqrt(max(0.0, s * (s - a) * (s - b) * (s - c))))


def vowel_triangle_area(tokens: list[PhoneToken], corners: dict[str, frozenset[str]],
                        normalize: bool = False,
                        min_corner_tokens: int = MIN_CORNER_TOKENS) -> float:
    """Heron's-formula area of the /i/-/a/-/u/ centroid triangle."""
    centroids = {}
    for key in ("i", "a", "u"):
        phones = corners[key]
        if normalize:
            from .featconfig import normalize_phone
            members = [t for t in tokens if normalize_phone(t.phone) in phones]
        else:
            members = [t for t in tokens if t.phone in phones]
        if len(members) < min_corner_tokens:
            raise InsufficientCornerTokens(
                f"corner /{key}/: need >= {min_corner_tokens} tokens, got {len(members)}")
        centroids[key] = _embedding_matrix(members).mean(axis=0)
    return heron_area(centroids["i"], centroids["a"], centroids["u"])


@dataclass
class SubsampleSettings:
    n_per_class: int = 30
    reps: int = 100
    seed: int = 42


def compute_profile_metrics(
    tokens: list[PhoneToken],
    directions: dict[str, FeatureDirection | str],
    config: LanguageConfig,
    min_tokens: int = 5,
    subsample: SubsampleSettings | None = None,
    speaker_id: str = "",
) -> tuple[dict[str, float], dict[str, str]]:
    """All 12 metrics for one speaker's tokens.

    `directions` maps feature name to either a FeatureDirection or, when
    direction estimation failed for that feature, a reason string.  A
    metric that cannot be computed is recorded in the absent map with a
    reason code, never as zero.
    """
    metrics: dict[str, float] = {}
    absent: dict[str, str] = {}
    normalize = config.normalize_diacritics

    for name in ALL_FEATURES:
        key = f"{name}_dprime"
        entry = directions.get(name)
        if entry is None or isinstance(entry, str):
            absent[key] = f"no_direction:{entry}" if entry else "no_direction"
            continue
        spec = config.feature(name)
        try:
            if subsample is not None:
                seed = derive_seed(subsample.seed, speaker_id, name)
                metrics[key] = subsampled_dprime(
                    tokens, entry, spec, subsample.n_per_class, subsample.reps,
                    seed, normalize)
            else:
                metrics[key] = dprime(tokens, entry, spec, min_tokens, normalize).d_prime
        except InsufficientTokens:
            absent[key] = "insufficient_tokens"
        except Ineligible:
            absent[key] = "subsample_ineligible"
        except ZeroVariance:
            absent[key] = "zero_variance"

    utterances = group_tokens_by_utterance(tokens)
    try:
        metrics["boundary_sharpness"] = boundary_sharpness(utterances)
    except NoTransitions:
        absent["boundary_sharpness"] = "no_transitions"
    try:
        metrics["cross_position_cosim"] = cross_position_cosim(utterances)
    except NoInteriorTokens:
        absent["cross_position_cosim"] = "no_interior_tokens"
    try:
        metrics["vowel_triangle_area"] = vowel_triangle_area(
            tokens, config.corner_vowels, normalize)
    except InsufficientCornerTokens:
        absent["vowel_triangle_area"] = "insufficient_corner_tokens"
    return metrics, absent


def speaker_profile(
    tokens: list[PhoneToken],
    directions: dict[str, FeatureDirection | str],
    config: LanguageConfig,
    speaker_id: str,
    corpus: str = "",
    language: str = "",
    aetiology: str = "",
    role: str = "patient",
    severity: Severity | None = None,
    n_utterances: int | None = None,
    min_tokens: int = 5,
    subsample: SubsampleSettings | None = None,
) -> SpeakerProfile:
    """Assemble a speaker's profile; partial profiles are the norm."""
    metrics, absent = compute_profile_metrics(
        tokens, directions, config, min_tokens, subsample, speaker_id)
    if n_utterances is None:
        n_utterances = len({t.utterance_id for t in tokens})
    return SpeakerProfile(
        speaker_id=speaker_id,
        corpus=corpus,
        language=language or config.language,
        aetiology=aetiology,
        role=role,
        severity=severity,
        metrics=metrics,
        absent=absent,
        n_phones=len(tokens),
        n_utterances=n_utterances,
        excluded=len(tokens) < CORPUS_TOKEN_THRESHOLD,
    )
