"""Corpus manifest loading and severity resolution.

The manifest is a JSON document describing corpora and speakers::

    {"corpora": [{"name": "mycorpus", "language": "english",
                  "aetiology": "PD", "control_corpus": "ctrlcorpus"}],
     "language_configs": {"english": "configs/english.json"},
     "speakers": [
        {"speaker_id": "S01", "corpus": "mycorpus", "role": "patient",
         "severity_label": "moderate", "intelligibility_pct": 72,
         "token_table_path": "tokens/S01.pet"},
        {"speaker_id": "S02", "corpus": "mycorpus", "role": "control",
         "utterances": [{"utterance_id": "u1",
                         "textgrid_path": "align/u1.TextGrid",
                         "frames_path": "frames/u1.frm"}]}]}

Severity precedence: explicit label, then intelligibility mapping, then
the control role.  Relative paths resolve against the manifest location.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConflictingSeverity, DuplicateSpeaker, SchemaError
from .featconfig import Severity, map_intelligibility

ROLES = ("control", "patient")


@dataclass
class UtteranceEntry:
    utterance_id: str
    textgrid_path: Path
    frames_path: Path


@dataclass
class CorpusEntry:
    name: str
    language: str
    aetiology: str = ""
    control_corpus: str | None = None


@dataclass
class SpeakerEntry:
    speaker_id: str
    corpus: str
    language: str
    aetiology: str
    role: str
    severity: Severity | None
    severity_source: str  # "label" | "intelligibility" | "role"
    intelligibility_pct: float | None = None
    token_table_path: Path | None = None
    utterances: list[UtteranceEntry] = field(default_factory=list)


@dataclass
class CorpusManifest:
    corpora: dict[str, CorpusEntry]
    speakers: list[SpeakerEntry]
    language_configs: dict[str, Path] = field(default_factory=dict)
    base_dir: Path = Path(".")

    def languages(self) -> list[str]:
        return sorted({s.language for s in self.speakers})


def _resolve_severity(raw: dict, role: str, where: str) -> tuple[Severity | None, str]:
    label = raw.get("severity_label")
    pct = raw.get("intelligibility_pct")
    from_label = Severity.from_label(label) if label is not None else None
    from_pct = map_intelligibility(float(pct)) if pct is not None else None
    if from_label is not None and from_pct is not None and from_label != from_pct:
        raise ConflictingSeverity(
            f"{where}: label {from_label.label!r} conflicts with intelligibility "
            f"{pct}% ({from_pct.label!r})")
    if from_label is not None:
        return from_label, "label"
    if from_pct is not None:
        return from_pct, "intelligibility"
    if role == "control":
        return Severity.CONTROL, "role"
    raise SchemaError(
        f"{where}: needs severity_label, intelligibility_pct, or role=control")


def load_manifest(source) -> CorpusManifest:
    """Load and validate a manifest from a path, JSON string, or dict."""
    base_dir = Path(".")
    if isinstance(source, dict):
        doc = source
    else:
        if isinstance(source, str) and source.lstrip().startswith("{"):
            text = source
        else:
            path = Path(source)
            if not path.exists():
                raise SchemaError(f"manifest file not found: {path}")
            base_dir = path.parent
            text = path.read_text("utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("manifest must be a JSON object")

    corpora: dict[str, CorpusEntry] = {}
    for raw in doc.get("corpora", []):
        name = raw.get("name")
        language = raw.get("language")
        if not name or not language:
            raise SchemaError("every corpus entry needs 'name' and 'language'")
        if name in corpora:
            raise SchemaError(f"corpus {name!r} declared twice")
        corpora[name] = CorpusEntry(
            name=name,
            language=language,
            aetiology=raw.get("aetiology", ""),
            control_corpus=raw.get("control_corpus"),
        )
    for entry in corpora.values():
        if entry.control_corpus is not None and entry.control_corpus not in corpora:
            raise SchemaError(
                f"corpus {entry.name!r} redirects controls to unknown corpus "
                f"{entry.control_corpus!r}")

    speakers: list[SpeakerEntry] = []
    seen: set[tuple[str, str]] = set()
    for raw in doc.get("speakers", []):
        speaker_id = raw.get("speaker_id")
        corpus_name = raw.get("corpus")
        if not speaker_id or not corpus_name:
            raise SchemaError("every speaker entry needs 'speaker_id' and 'corpus'")
        if corpus_name not in corpora:
            raise SchemaError(f"speaker {speaker_id!r} references unknown corpus {corpus_name!r}")
        key = (corpus_name, speaker_id)
        if key in seen:
            raise DuplicateSpeaker(f"speaker {speaker_id!r} appears twice in corpus {corpus_name!r}")
        seen.add(key)

        corpus = corpora[corpus_name]
        role = raw.get("role", "patient")
        if role not in ROLES:
            raise SchemaError(f"speaker {speaker_id!r}: role must be one of {ROLES}")
        where = f"speaker {speaker_id!r} ({corpus_name})"
        severity, source = _resolve_severity(raw, role, where)

        utterances = []
        token_table = raw.get("token_table_path")
        for u in raw.get("utterances", []):
            if "utterance_id" not in u or "textgrid_path" not in u or "frames_path" not in u:
                raise SchemaError(f"{where}: utterance entries need utterance_id, "
                                  f"textgrid_path and frames_path")
            utterances.append(UtteranceEntry(
                u["utterance_id"],
                base_dir / u["textgrid_path"],
                base_dir / u["frames_path"],
            ))
        if token_table is None and not utterances:
            raise SchemaError(f"{where}: needs token_table_path or utterances")

        pct = raw.get("intelligibility_pct")
        speakers.append(SpeakerEntry(
            speaker_id=speaker_id,
            corpus=corpus_name,
            language=raw.get("language", corpus.language),
            aetiology=raw.get("aetiology", corpus.aetiology),
            role=role,
            severity=severity,
            severity_source=source,
            intelligibility_pct=float(pct) if pct is not None else None,
            token_table_path=(base_dir / token_table) if token_table else None,
            utterances=utterances,
        ))

    configs = {}
    for lang, cfg_path in (doc.get("language_configs") or {}).items():
        configs[lang] = base_dir / cfg_path
    return CorpusManifest(corpora=corpora, speakers=speakers,
                          language_configs=configs, base_dir=base_dir)
