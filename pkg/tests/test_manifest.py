import json

import pytest

from phonoprofile.errors import ConflictingSeverity, DuplicateSpeaker, SchemaError
from phonoprofile.featconfig import Severity
from phonoprofile.manifest import load_manifest


def _doc(**overrides):
    doc = {
        "corpora": [{"name": "c1", "language": "english", "aetiology": "PD"}],
        "speakers": [
            {"speaker_id": "S1", "corpus": "c1", "role": "patient",
             "severity_label": "moderate", "token_table_path": "tokens/S1.pet"},
            {"speaker_id": "S2", "corpus": "c1", "role": "control",
             "token_table_path": "tokens/S2.pet"},
        ],
    }
    doc.update(overrides)
    return doc


class TestSeverityResolution:
    def test_intelligibility_mapping(self):
        doc = _doc(speakers=[{
            "speaker_id": "S1", "corpus": "c1", "role": "patient",
            "intelligibility_pct": 72, "token_table_path": "a.pet"}])
        m = load_manifest(doc)
        assert m.speakers[0].severity is Severity.MODERATE
        assert m.speakers[0].severity_source == "intelligibility"

    def test_control_role_fallback(self):
        m = load_manifest(_doc())
        control = [s for s in m.speakers if s.speaker_id == "S2"][0]
        assert control.severity is Severity.CONTROL
        assert control.severity_source == "role"

    def test_label_takes_precedence(self):
        doc = _doc(speakers=[{
            "speaker_id": "S1", "corpus": "c1", "role": "patient",
            "severity_label": "mild", "intelligibility_pct": 90,
            "token_table_path": "a.pet"}])
        m = load_manifest(doc)
        assert m.speakers[0].severity is Severity.MILD
        assert m.speakers[0].severity_source == "label"

    def test_conflicting_severity(self):
        doc = _doc(speakers=[{
            "speaker_id": "S1", "corpus": "c1", "role": "patient",
            "severity_label": "mild", "intelligibility_pct": 50,
            "token_table_path": "a.pet"}])
        with pytest.raises(ConflictingSeverity):
            load_manifest(doc)

    def test_patient_without_severity(self):
        doc = _doc(speakers=[{
            "speaker_id": "S1", "corpus": "c1", "role": "patient",
            "token_table_path": "a.pet"}])
        with pytest.raises(SchemaError):
            load_manifest(doc)


class TestValidation:
    def test_duplicate_speaker(self):
        doc = _doc()
        doc["speakers"].append(dict(doc["speakers"][0]))
        with pytest.raises(DuplicateSpeaker):
            load_manifest(doc)

    def test_same_id_in_different_corpora_ok(self):
        doc = _doc()
        doc["corpora"].append({"name": "c2", "language": "english"})
        extra = dict(doc["speakers"][0])
        extra["corpus"] = "c2"
        doc["speakers"].append(extra)
        assert len(load_manifest(doc).speakers) == 3

    def test_unknown_corpus(self):
        doc = _doc()
        doc["speakers"][0]["corpus"] = "nope"
        with pytest.raises(SchemaError):
            load_manifest(doc)

    def test_unknown_control_corpus(self):
        doc = _doc()
        doc["corpora"][0]["control_corpus"] = "ghost"
        with pytest.raises(SchemaError):
            load_manifest(doc)

    def test_bad_role(self):
        doc = _doc()
        doc["speakers"][0]["role"] = "listener"
        with pytest.raises(SchemaError):
            load_manifest(doc)

    def test_needs_token_source(self):
        doc = _doc()
        del doc["speakers"][0]["token_table_path"]
        with pytest.raises(SchemaError):
            load_manifest(doc)

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            load_manifest(tmp_path / "missing.json")

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{broken", "utf-8")
        with pytest.raises(SchemaError):
            load_manifest(path)


class TestPathsAndInheritance:
    def test_relative_paths_resolve_against_manifest(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(_doc()), "utf-8")
        m = load_manifest(path)
        assert m.speakers[0].token_table_path == tmp_path / "tokens/S1.pet"
        assert m.base_dir == tmp_path

    def test_language_and_aetiology_inherited(self):
        m = load_manifest(_doc())
        s = m.speakers[0]
        assert s.language == "english"
        assert s.aetiology == "PD"

    def test_speaker_overrides(self):
        doc = _doc()
        doc["speakers"][0]["aetiology"] = "ALS"
        m = load_manifest(doc)
        assert m.speakers[0].aetiology == "ALS"

    def test_utterance_entries(self, tmp_path):
        doc = _doc(speakers=[{
            "speaker_id": "S1", "corpus": "c1", "role": "control",
            "utterances": [{"utterance_id": "u1",
                            "textgrid_path": "tg/u1.TextGrid",
                            "frames_path": "fr/u1.frm"}]}])
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc), "utf-8")
        m = load_manifest(path)
        utt = m.speakers[0].utterances[0]
        assert utt.textgrid_path == tmp_path / "tg/u1.TextGrid"
        assert utt.frames_path == tmp_path / "fr/u1.frm"

    def test_language_configs(self, tmp_path):
        doc = _doc(language_configs={"english": "cfg/en.json"})
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc), "utf-8")
        m = load_manifest(path)
        assert m.language_configs["english"] == tmp_path / "cfg/en.json"
