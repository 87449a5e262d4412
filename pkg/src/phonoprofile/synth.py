"""Synthetic embedding corpora with known class separation.

Each phonological feature gets a dedicated pair of synthetic phones whose
embeddings are two isotropic Gaussians separated by a severity-dependent
distance along a fixed hidden axis, so the analytically expected
separability is exactly delta_mu / sigma.  Corpora generated here provide
the oracles for end-to-end testing of the analysis pipeline.

Randomness comes from Box-Muller transforms over a counter-based Philox
(4x64) generator, keyed per speaker, so output bytes are reproducible for
a given seed on any platform and under any parallel schedule.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedio import PhoneToken, write_tokens
from .errors import InvalidSpec
from .featconfig import ALL_FEATURES

SEVERITY_LABELS = ("control", "mild", "moderate", "severe")


@dataclass
class SynthSpec:
    dim: int = 16
    speakers_per_level: tuple[int, int, int, int] = (50, 50, 50, 50)
    tokens_per_class: int = 100
    separation: tuple[float, float, float, float] = (3.0, 2.0, 1.0, 0.5)
    noise_sigma: float = 1.0
    seed: int = 42
    features: tuple[str, ...] = ALL_FEATURES
    corner_tokens: int = 10
    corner_scale: float = 8.0
    utterance_len: tuple[int, int] = (15, 25)
    n_corpora: int = 1
    control_corpus_split: bool = False
    tokens_jitter: float = 0.0
    aetiologies: tuple[str, ...] = ("synthetic",)
    aetiology_scale: float = 0.0
    language: str = "synth"

    def validate(self) -> None:
        if self.dim < 2:
            raise InvalidSpec("dim must be >= 2")
        if len(self.speakers_per_level) != 4 or any(n < 0 for n in self.speakers_per_level):
            raise InvalidSpec("speakers_per_level must give 4 non-negative counts")
        if self.tokens_per_class < 1:
            raise InvalidSpec("tokens_per_class must be >= 1")
        if len(self.separation) != 4 or any(d < 0 for d in self.separation):
            raise InvalidSpec("separation must give 4 non-negative values")
        if self.noise_sigma <= 0:
            raise InvalidSpec("noise_sigma must be positive")
        if not self.features or any(f not in ALL_FEATURES for f in self.features):
            raise InvalidSpec(f"features must be a subset of {ALL_FEATURES}")
        if self.n_corpora < 1:
            raise InvalidSpec("n_corpora must be >= 1")
        if not 0.0 <= self.tokens_jitter < 1.0:
            raise InvalidSpec("tokens_jitter must be in [0, 1)")
        if self.utterance_len[0] < 1 or self.utterance_len[1] < self.utterance_len[0]:
            raise InvalidSpec("utterance_len must be an increasing positive range")


def _philox(seed: int, stream: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def box_muller(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normals via Box-Muller on Philox uniforms."""
    n = int(np.prod(shape))
    m = (n + 1) // 2
    u1 = 1.0 - rng.random(m)  # (0, 1]: keeps log() finite
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return z[:n].reshape(shape)


def _feature_axis(dim: int, index: int) -> np.ndarray:
    axis = np.zeros(dim)
    axis[index % dim] = 1.0
    return axis


def _corner_centroids(dim: int, side: float) -> dict[str, np.ndarray]:
    """Equilateral triangle of the given side in the last two axes."""
    u = _feature_axis(dim, dim - 2)
    v = _feature_axis(dim, dim - 1)
    return {
        "i": side * u,
        "a": side * (0.5 * u + (np.sqrt(3.0) / 2.0) * v),
        "u": np.zeros(dim),
    }


def _aetiology_multiplier(aet_index: int, feat_index: int, scale: float) -> float:
    if scale == 0.0:
        return 1.0
    return 1.0 + scale * (((aet_index + feat_index) % 3) - 1)


def synth_language_config(spec: SynthSpec) -> dict:
    features = {}
    for name in ALL_FEATURES:
        features[name] = {"positive": [f"p_{name}"], "negative": [f"n_{name}"]}
    return {
        "language": spec.language,
        "silence": ["", "sil", "sp", "spn", "<eps>"],
        "corner_vowels": {"i": ["i"], "a": ["a"], "u": ["u"]},
        "features": features,
    }


def _speaker_tokens(spec: SynthSpec, speaker_id: str, ordinal: int,
                    aet_index: int, stream: int) -> list[PhoneToken]:
    rng = _philox(spec.seed, stream)
    delta = spec.separation[ordinal]
    sigma = spec.noise_sigma

    jitter = 1.0
    if spec.tokens_jitter > 0:
        jitter = 1.0 + spec.tokens_jitter * (2.0 * rng.random() - 1.0)
    n_class = max(1, int(round(spec.tokens_per_class * jitter)))

    rows = []
    phones = []
    for fi, name in enumerate(spec.features):
        axis = _feature_axis(spec.dim, fi)
        mult = 1.0
        if ordinal > 0:  # patients only; controls define the reference
            mult = _aetiology_multiplier(aet_index, fi, spec.aetiology_scale)
        offset = 0.5 * delta * mult * sigma
        noise = sigma * box_muller(rng, (2 * n_class, spec.dim))
        block = noise + np.concatenate([
            np.tile(offset * axis, (n_class, 1)),
            np.tile(-offset * axis, (n_class, 1)),
        ])
        rows.append(block)
        phones.extend([f"p_{name}"] * n_class + [f"n_{name}"] * n_class)

    if spec.corner_tokens > 0:
        shrink = spec.separation[ordinal] / spec.separation[0] if spec.separation[0] > 0 else 1.0
        centroids = _corner_centroids(spec.dim, spec.corner_scale * shrink)
        for key in ("i", "a", "u"):
            noise = sigma * box_muller(rng, (spec.corner_tokens, spec.dim))
            rows.append(noise + centroids[key])
            phones.extend([key] * spec.corner_tokens)

    embeddings = np.concatenate(rows, axis=0).astype(np.float32)
    order = rng.permutation(len(phones))

    tokens = []
    lo, hi = spec.utterance_len
    utt_index = 0
    position = 0
    utt_len = int(rng.integers(lo, hi + 1))
    t = 0.0
    for idx in order:
        if position >= utt_len:
            utt_index += 1
            position = 0
            utt_len = int(rng.integers(lo, hi + 1))
            t = 0.0
        duration = 0.04 + 0.08 * rng.random()
        tokens.append(PhoneToken(
            speaker_id=speaker_id,
            utterance_id=f"u{utt_index:04d}",
            phone=phones[idx],
            start=t,
            end=t + duration,
            embedding=embeddings[idx],
            position_index=position,
        ))
        t += duration
        position += 1
    return tokens


def generate(spec: SynthSpec, out_dir) -> dict:
    """Write a synthetic corpus (manifest, config, token files, run log).

    Returns the manifest document.  The analytic expected d' per severity
    level (delta_mu / sigma) is recorded in the run log.
    """
    spec.validate()
    out = Path(out_dir)
    (out / "tokens").mkdir(parents=True, exist_ok=True)

    config_doc = synth_language_config(spec)
    (out / "config.json").write_text(
        json.dumps(config_doc, indent=2, sort_keys=True, ensure_ascii=False), "utf-8")

    patient_corpora = [f"synth{c + 1:02d}" for c in range(spec.n_corpora)]
    corpora = [{"name": name, "language": spec.language} for name in patient_corpora]
    if spec.control_corpus_split:
        corpora.append({"name": "synthctrl", "language": spec.language})
        for entry in corpora[:-1]:
            entry["control_corpus"] = "synthctrl"

    speakers = []
    stream = 0
    patient_counter = 0
    for ordinal, count in enumerate(spec.speakers_per_level):
        for j in range(count):
            speaker_id = f"S{ordinal}{j:03d}"
            if ordinal == 0 and spec.control_corpus_split:
                corpus = "synthctrl"
            else:
                corpus = patient_corpora[(j if ordinal == 0 else patient_counter) % len(patient_corpora)]
            aet_index = 0
            aetiology = spec.aetiologies[0]
            if ordinal > 0:
                aet_index = patient_counter % len(spec.aetiologies)
                aetiology = spec.aetiologies[aet_index]
                patient_counter += 1
            tokens = _speaker_tokens(spec, speaker_id, ordinal, aet_index, stream)
            stream += 1
            rel = f"tokens/{speaker_id}.pet"
            write_tokens(tokens, out / rel, dim=spec.dim)
            speakers.append({
                "speaker_id": speaker_id,
                "corpus": corpus,
                "role": "control" if ordinal == 0 else "patient",
                "severity_label": SEVERITY_LABELS[ordinal],
                "aetiology": aetiology,
                "token_table_path": rel,
            })

    manifest_doc = {
        "corpora": corpora,
        "language_configs": {spec.language: "config.json"},
        "speakers": speakers,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest_doc, indent=2, sort_keys=True, ensure_ascii=False), "utf-8")

    log_lines = [json.dumps({
        "event": "synth_params",
        "generator": "philox4x64-boxmuller",
        "dim": spec.dim,
        "seed": spec.seed,
        "tokens_per_class": spec.tokens_per_class,
        "noise_sigma": spec.noise_sigma,
        "n_speakers": len(speakers),
    }, sort_keys=True)]
    for ordinal, label in enumerate(SEVERITY_LABELS):
        log_lines.append(json.dumps({
            "event": "synth_analytic",
            "severity": label,
            "expected_dprime": spec.separation[ordinal] / spec.noise_sigma,
        }, sort_keys=True))
    (out / "synth_log.jsonl").write_text("\n".join(log_lines) + "\n", "utf-8")
    return manifest_doc
