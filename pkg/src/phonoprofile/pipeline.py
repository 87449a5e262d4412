"""End-to-end orchestration: manifests to profiles to report tables.

Determinism contract: identical inputs and options produce byte-identical
output files, independent of worker count or manifest ordering.  All
aggregation iterates over sorted keys, every stochastic step derives its
stream from (seed, context strings), and floats are serialised with
repr() so they round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import embedio, profiles as prof, stats
from .errors import (
    ClassTooSmall,
    ConstantInput,
    DegenerateDirection,
    DegenerateRho,
    InsufficientTokens,
    NearSingular,
    NoControlsForLanguage,
    PhonoProfileError,
    SchemaError,
    StratumTooSmall,
    TooFewPairs,
    TooFewStudies,
)
from .featconfig import (
    ALL_FEATURES,
    LanguageConfig,
    Severity,
    default_english_config,
    load_language_config,
)
from .manifest import CorpusManifest, SpeakerEntry
from .profiles import (
    CONSONANT_DPRIME_METRICS,
    DPRIME_METRICS,
    METRIC_KEYS,
    SpeakerProfile,
    SubsampleSettings,
)
from .textgrid import extract_phone_intervals, parse_textgrid

REPORT_FILES = (
    "correlations", "within_corpus", "fdr", "groups", "meta", "loco",
    "quartiles", "alignment", "roc", "aetiology",
)

#: ROC orientation per metric: d' and triangle area fall with worsening
#: speech, the two cosine metrics rise.
_ROC_DIRECTION = {key: "lower" for key in METRIC_KEYS}
_ROC_DIRECTION["boundary_sharpness"] = "higher"
_ROC_DIRECTION["cross_position_cosim"] = "higher"
_ROC_DIRECTION["mean_consonant_dprime"] = "lower"

_FILTERED_SUFFIX = "_d30"


@dataclass
class ProfileOptions:
    seed: int = 42
    min_tokens: int = 5
    min_duration: float = 0.0  # 0 disables the short-token filter
    subsample: bool = False
    subsample_n: int = 30
    subsample_reps: int = 100
    workers: int = 1
    tier: str | None = None
    filtered_variant_duration: float = 0.030


@dataclass
class AnalysisOptions:
    seed: int = 42
    bootstrap_iters: int = 1000
    fdr_q: float = 0.05
    quartile_features: tuple[str, ...] = ("nasality_dprime",)
    l2: float = 1.0


class RunLog:
    def __init__(self):
        self.events: list[dict] = []

    def add(self, event: str, **fields) -> None:
        entry = {"event": event}
        entry.update(fields)
        self.events.append(entry)

    def write(self, path: Path) -> None:
        lines = [json.dumps(e, sort_keys=True, ensure_ascii=False) for e in self.events]
        path.write_text("\n".join(lines) + ("\n" if lines else ""), "utf-8")


# --- profile construction ---

def load_configs(manifest: CorpusManifest, overrides: dict[str, LanguageConfig] | None = None,
                 ) -> dict[str, LanguageConfig]:
    """One LanguageConfig per language in the manifest.

    Precedence: explicit overrides, then manifest-declared config paths,
    then the bundled English default for english/en.
    """
    configs = dict(overrides or {})
    for lang in {s.language for s in manifest.speakers}:
        if lang in configs:
            continue
        if lang in manifest.language_configs:
            path = manifest.language_configs[lang]
            configs[lang] = load_language_config(Path(path).read_text("utf-8"))
        elif lang.lower() in ("english", "en"):
            configs[lang] = default_english_config()
        else:
            raise SchemaError(f"no language config available for {lang!r}")
    return configs


def load_speaker_tokens(speaker: SpeakerEntry, config: LanguageConfig,
                        tier: str | None = None) -> tuple[list[embedio.PhoneToken], int]:
    """Tokens plus the number of utterances processed."""
    if speaker.token_table_path is not None:
        tokens = embedio.read_tokens(speaker.token_table_path)
        return tokens, len({t.utterance_id for t in tokens})
    tokens = []
    for utt in speaker.utterances:
        grid = parse_textgrid(Path(utt.textgrid_path).read_bytes())
        intervals = extract_phone_intervals(
            grid, tier, utt.utterance_id, config.silence_labels)
        frames = embedio.read_frames(utt.frames_path)
        tokens.extend(embedio.tokens_from_alignment(
            speaker.speaker_id, utt.utterance_id, intervals, frames))
    return tokens, len(speaker.utterances)


def _direction_scope(speaker: SpeakerEntry, manifest: CorpusManifest) -> str:
    redirect = manifest.corpora[speaker.corpus].control_corpus
    if redirect is not None:
        return f"corpus:{redirect}"
    return f"language:{speaker.language}"


def _compute_scope_directions(control_tokens, config, min_tokens, language,
                              ) -> dict[str, object]:
    directions: dict[str, object] = {}
    for name in ALL_FEATURES:
        spec = config.feature(name)
        try:
            directions[name] = prof.compute_direction(
                control_tokens, spec, language, config.normalize_diacritics, min_tokens)
        except InsufficientTokens:
            directions[name] = "insufficient_control_tokens"
        except DegenerateDirection:
            directions[name] = "degenerate_direction"
    return directions


def _profile_one(args):
    """Worker entry: build one speaker's profile (pickled across processes)."""
    speaker, config, directions, filtered_directions, options = args
    tokens, n_utterances = load_speaker_tokens(speaker, config, options.tier)
    if options.min_duration > 0:
        tokens = prof.filter_short_tokens(tokens, options.min_duration)

    subsample = None
    if options.subsample:
        subsample = SubsampleSettings(options.subsample_n, options.subsample_reps, options.seed)

    profile = prof.speaker_profile(
        tokens, directions, config,
        speaker_id=speaker.speaker_id,
        corpus=speaker.corpus,
        language=speaker.language,
        aetiology=speaker.aetiology,
        role=speaker.role,
        severity=speaker.severity,
        n_utterances=n_utterances,
        min_tokens=options.min_tokens,
        subsample=subsample,
    )
    filtered_tokens = prof.filter_short_tokens(tokens, options.filtered_variant_duration)
    fm, fa = prof.compute_profile_metrics(
        filtered_tokens, filtered_directions, config, options.min_tokens,
        None, speaker.speaker_id)
    profile.filtered_metrics = fm
    profile.filtered_absent = fa
    return profile


def build_profiles(manifest: CorpusManifest, configs: dict[str, LanguageConfig],
                   options: ProfileOptions, log: RunLog | None = None,
                   ) -> list[SpeakerProfile]:
    """Profile every speaker against directions estimated from controls only.

    Directions are computed per language (or per redirected control corpus)
    from control-role speakers.  A parallel direction set from tokens that
    pass the 30 ms duration filter backs the alignment-control analyses;
    that variant re-pools tokens before any d' is recomputed.
    """
    log = log or RunLog()
    speakers = sorted(manifest.speakers, key=lambda s: (s.corpus, s.speaker_id))

    scopes_needed = {}
    for speaker in speakers:
        scopes_needed.setdefault(_direction_scope(speaker, manifest), speaker.language)

    control_tokens: dict[str, list] = {scope: [] for scope in scopes_needed}
    for speaker in speakers:
        if speaker.role != "control":
            continue
        config = configs[speaker.language]
        member_scopes = [s for s in (f"language:{speaker.language}",
                                     f"corpus:{speaker.corpus}") if s in control_tokens]
        if not member_scopes:
            continue
        try:
            tokens, _ = load_speaker_tokens(speaker, config, options.tier)
        except (PhonoProfileError, OSError) as exc:
            log.add("control_tokens_failed", corpus=speaker.corpus,
                    speaker_id=speaker.speaker_id,
                    error=f"{type(exc).__name__}: {exc}")
            continue
        if options.min_duration > 0:
            tokens = prof.filter_short_tokens(tokens, options.min_duration)
        for scope in member_scopes:
            control_tokens[scope].extend(tokens)

    directions: dict[str, dict] = {}
    filtered_directions: dict[str, dict] = {}
    for scope in sorted(scopes_needed):
        language = scopes_needed[scope]
        config = configs[language]
        pool = control_tokens[scope]
        if not pool:
            raise NoControlsForLanguage(
                f"no control speakers found for direction scope {scope!r}")
        directions[scope] = _compute_scope_directions(
            pool, config, options.min_tokens, language)
        filtered_pool = prof.filter_short_tokens(pool, options.filtered_variant_duration)
        filtered_directions[scope] = _compute_scope_directions(
            filtered_pool, config, options.min_tokens, language)
        for name in ALL_FEATURES:
            entry = directions[scope][name]
            if isinstance(entry, str):
                log.add("direction_failed", scope=scope, feature=name, reason=entry)
            else:
                log.add("direction", scope=scope, feature=name,
                        n_positive=entry.n_positive, n_negative=entry.n_negative)

    jobs = []
    for speaker in speakers:
        scope = _direction_scope(speaker, manifest)
        jobs.append((speaker, configs[speaker.language], directions[scope],
                     filtered_directions[scope], options))

    results: list[SpeakerProfile | None] = [None] * len(jobs)
    failures = []
    if options.workers > 1:
        with ProcessPoolExecutor(max_workers=options.workers) as pool_exec:
            for i, outcome in enumerate(pool_exec.map(_profile_one_safe, jobs)):
                results[i] = outcome
    else:
        for i, job in enumerate(jobs):
            results[i] = _profile_one_safe(job)

    output = []
    for job, outcome in zip(jobs, results):
        if isinstance(outcome, SpeakerProfile):
            output.append(outcome)
        else:
            failures.append((job[0], outcome))
    for speaker, message in failures:
        log.add("speaker_error", corpus=speaker.corpus,
                speaker_id=speaker.speaker_id, error=message)
    return output


def _profile_one_safe(args):
    try:
        return _profile_one(args)
    except PhonoProfileError as exc:
        return f"{type(exc).__name__}: {exc}"
    except OSError as exc:
        return f"{type(exc).__name__}: {exc}"


# --- profile table serialisation ---

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


PROFILE_COLUMNS = (
    ["speaker_id", "corpus", "language", "aetiology", "role", "severity",
     "severity_ordinal", "excluded", "n_phones", "n_utterances", "phones_per_utterance"]
    + list(METRIC_KEYS)
    + [key + _FILTERED_SUFFIX for key in METRIC_KEYS]
    + ["absent_reasons"]
)


def write_profiles_csv(profiles: list[SpeakerProfile], path) -> None:
    rows = []
    for p in sorted(profiles, key=lambda q: (q.corpus, q.speaker_id)):
        reasons = [f"{k}={v}" for k, v in sorted(p.absent.items())]
        reasons += [f"{k}{_FILTERED_SUFFIX}={v}" for k, v in sorted(p.filtered_absent.items())]
        row = [p.speaker_id, p.corpus, p.language, p.aetiology, p.role,
               p.severity.label if p.severity else "",
               p.severity_ordinal, p.excluded, p.n_phones, p.n_utterances,
               p.phones_per_utterance]
        row += [p.metrics.get(k) for k in METRIC_KEYS]
        row += [p.filtered_metrics.get(k) for k in METRIC_KEYS]
        row += [";".join(reasons)]
        rows.append([_fmt(v) for v in row])
    _write_csv(path, PROFILE_COLUMNS, rows)


def read_profiles_csv(path) -> list[SpeakerProfile]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    out = []
    for row in rows:
        metrics = {}
        filtered = {}
        for key in METRIC_KEYS:
            if row.get(key):
                metrics[key] = float(row[key])
            if row.get(key + _FILTERED_SUFFIX):
                filtered[key] = float(row[key + _FILTERED_SUFFIX])
        absent = {}
        filtered_absent = {}
        for item in (row.get("absent_reasons") or "").split(";"):
            if not item:
                continue
            key, _, reason = item.partition("=")
            if key.endswith(_FILTERED_SUFFIX):
                filtered_absent[key[: -len(_FILTERED_SUFFIX)]] = reason
            else:
                absent[key] = reason
        severity = Severity.from_label(row["severity"]) if row.get("severity") else None
        out.append(SpeakerProfile(
            speaker_id=row["speaker_id"],
            corpus=row["corpus"],
            language=row["language"],
            aetiology=row["aetiology"],
            role=row["role"],
            severity=severity,
            metrics=metrics,
            absent=absent,
            n_phones=int(row["n_phones"]),
            n_utterances=int(row["n_utterances"]),
            excluded=row["excluded"] == "true",
            filtered_metrics=filtered,
            filtered_absent=filtered_absent,
        ))
    return out


def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue(), "utf-8")


def _write_table(out_dir: Path, name: str, header: list[str], rows: list[list],
                 fmt: str) -> None:
    rows = [[_fmt(v) for v in row] for row in rows]
    if fmt == "jsonl":
        lines = [json.dumps(dict(zip(header, row)), sort_keys=True, ensure_ascii=False)
                 for row in rows]
        (out_dir / f"{name}.jsonl").write_text(
            "\n".join(lines) + ("\n" if lines else ""), "utf-8")
    else:
        _write_csv(out_dir / f"{name}.csv", header, rows)


# --- analysis helpers ---

def included(profiles: list[SpeakerProfile]) -> list[SpeakerProfile]:
    """Speakers entering corpus-level analyses: severity known, not excluded."""
    return [p for p in profiles if not p.excluded and p.severity is not None]


def _metric_pairs(rows: list[SpeakerProfile], metric: str,
                  source: str = "metrics") -> tuple[np.ndarray, np.ndarray]:
    values = []
    ordinals = []
    for p in rows:
        store = p.metrics if source == "metrics" else p.filtered_metrics
        if metric in store:
            values.append(store[metric])
            ordinals.append(p.severity_ordinal)
    return np.asarray(values, float), np.asarray(ordinals, float)


def _spearman_row(values: np.ndarray, ordinals: np.ndarray):
    """(rho, p, n) or (None, None, n, reason)."""
    if len(values) < 3:
        return None, None, len(values), "too_few_pairs"
    try:
        result = stats.spearman(values, ordinals)
    except ConstantInput:
        return None, None, len(values), "constant_input"
    return result.coefficient, result.p_value, result.n, ""


# --- report sections ---

def severity_correlation_report(profiles, options: AnalysisOptions, log: RunLog):
    """Pooled and within-corpus severity correlations plus the FDR table."""
    rows = included(profiles)
    pooled_rows = []
    tests = []  # (scope, corpus, feature, p)
    for metric in METRIC_KEYS:
        values, ordinals = _metric_pairs(rows, metric)
        rho, p, n, reason = _spearman_row(values, ordinals)
        if rho is None:
            pooled_rows.append([metric, None, None, n, None, None,
                                0, 0, "skipped", reason])
            continue
        ci = None
        skipped = 0
        if options.bootstrap_iters > 0:
            boot_seed = prof.derive_seed(options.seed, "bootstrap", metric)
            ci = stats.bootstrap_ci(list(zip(values, ordinals)), "spearman",
                                    options.bootstrap_iters, boot_seed)
            skipped = ci.skipped
        pooled_rows.append([
            metric, rho, p, n,
            ci.lower if ci else None, ci.upper if ci else None,
            options.bootstrap_iters, skipped, "ok", ""])
        tests.append(("pooled", "", metric, p))

    corpus_names = sorted({p.corpus for p in rows})
    within_rows = []
    for corpus in corpus_names:
        members = [p for p in rows if p.corpus == corpus]
        levels = {p.severity_ordinal for p in members}
        if len(levels) < 3:
            log.add("within_corpus_skipped", corpus=corpus,
                    reason="fewer_than_3_severity_levels", levels=len(levels))
            continue
        for metric in METRIC_KEYS:
            values, ordinals = _metric_pairs(members, metric)
            rho, p, n, reason = _spearman_row(values, ordinals)
            if rho is None:
                log.add("within_corpus_skipped", corpus=corpus, feature=metric,
                        reason=reason)
                continue
            within_rows.append([corpus, metric, rho, p, n])
            tests.append(("within", corpus, metric, p))

    fdr_rows = []
    if tests:
        adjusted = stats.bh_fdr([t[3] for t in tests])
        for (scope, corpus, metric, p_raw), p_adj in zip(tests, adjusted):
            fdr_rows.append([scope, corpus, metric, p_raw, p_adj,
                             p_adj <= options.fdr_q])
    return pooled_rows, within_rows, fdr_rows


def group_comparison_report(profiles):
    """Control vs severe Mann-Whitney U and Cliff's delta per feature."""
    rows = included(profiles)
    out = []
    for metric in METRIC_KEYS:
        control = [p.metrics[metric] for p in rows
                   if p.severity is Severity.CONTROL and metric in p.metrics]
        severe = [p.metrics[metric] for p in rows
                  if p.severity is Severity.SEVERE and metric in p.metrics]
        if not control or not severe:
            out.append([metric, len(control), len(severe), None, None, None,
                        "skipped", "missing_group"])
            continue
        mw = stats.mann_whitney(control, severe)
        delta = stats.cliffs_delta(control, severe)
        out.append([metric, len(control), len(severe), mw.u, mw.p_value,
                    delta, "ok", ""])
    return out


def meta_report(profiles, log: RunLog):
    """Per consonant feature: per-corpus effects and random-effects pooling.

    A corpus enters as a study when it has >= 4 severity-labelled speakers
    with the feature, >= 2 distinct severity levels, and |rho| < 1.
    """
    rows = included(profiles)
    corpus_names = sorted({p.corpus for p in rows})
    out = []
    for metric in CONSONANT_DPRIME_METRICS:
        effects = []
        for corpus in corpus_names:
            members = [p for p in rows if p.corpus == corpus]
            values, ordinals = _metric_pairs(members, metric)
            if len(values) < 4 or len(set(ordinals.tolist())) < 2:
                continue
            rho, p, n, reason = _spearman_row(values, ordinals)
            if rho is None:
                continue
            if abs(rho) >= 1.0:
                log.add("meta_study_excluded", corpus=corpus, feature=metric,
                        reason="degenerate_rho")
                continue
            effects.append((corpus, rho, n))
        for corpus, rho, n in effects:
            out.append([metric, "study", corpus, rho, n] + [None] * 12 + ["ok", ""])
        if len(effects) < 2:
            out.append([metric, "pooled", "", None, None] + [None] * 12
                       + ["skipped", "too_few_studies"])
            continue
        pairs = [(rho, n) for _, rho, n in effects]
        try:
            meta = stats.dl_meta(pairs)
        except (TooFewStudies, DegenerateRho) as exc:
            out.append([metric, "pooled", "", None, None] + [None] * 12
                       + ["skipped", type(exc).__name__])
            continue
        hksj_ci, hksj_p = stats.hksj_adjust(meta, pairs)
        pi = None
        if meta.k >= 3:
            pi = stats.prediction_interval(meta, pairs)
        out.append([
            metric, "pooled", "", None, None,
            meta.k, meta.pooled_rho, meta.tau2, meta.i2, meta.q_stat,
            meta.dl_ci[0], meta.dl_ci[1], hksj_ci[0], hksj_ci[1], hksj_p,
            pi[0] if pi else None, pi[1] if pi else None,
            "ok", ""])
    return out


def loco_report(profiles):
    """Pooled correlations after removing each corpus in turn."""
    rows = included(profiles)
    corpus_names = sorted({p.corpus for p in rows})
    out = []
    for metric in CONSONANT_DPRIME_METRICS:
        values, ordinals = _metric_pairs(rows, metric)
        base_rho, base_p, base_n, reason = _spearman_row(values, ordinals)
        out.append([metric, "none", base_n, base_rho, base_p, None,
                    "ok" if base_rho is not None else "skipped", reason])
        for corpus in corpus_names:
            remaining = [p for p in rows if p.corpus != corpus]
            values, ordinals = _metric_pairs(remaining, metric)
            rho, p, n, reason = _spearman_row(values, ordinals)
            delta = None
            if rho is not None and base_rho is not None:
                delta = rho - base_rho
            out.append([metric, corpus, n, rho, p, delta,
                        "ok" if rho is not None else "skipped", reason])
    return out


def quartile_report(profiles, options: AnalysisOptions):
    """Severity correlations stratified by token-count quartile."""
    rows = included(profiles)
    if len(rows) < 8:
        raise StratumTooSmall(
            f"quartile stratification needs >= 8 speakers, got {len(rows)}")
    covariate = np.asarray([p.n_phones for p in rows], float)
    q1, q2, q3 = np.percentile(covariate, [25, 50, 75])
    bounds = [(-np.inf, q1), (q1, q2), (q2, q3), (q3, np.inf)]
    out = []
    for metric in options.quartile_features:
        for qi, (lo, hi) in enumerate(bounds, start=1):
            members = [p for p, c in zip(rows, covariate) if lo < c <= hi]
            cov_values = [p.n_phones for p in members]
            values, ordinals = _metric_pairs(members, metric)
            rho, p, n, reason = _spearman_row(values, ordinals)
            out.append([
                metric, f"Q{qi}",
                min(cov_values) if cov_values else None,
                max(cov_values) if cov_values else None,
                n, rho, p, "ok" if rho is not None else "skipped", reason])
    return out


def alignment_report(profiles):
    """Alignment-quality control analyses.

    Alignment quality is phones per utterance.  Sections: its raw severity
    correlation, per-feature partials controlling for it, correlations
    after dropping the bottom decile by quality, and correlations from the
    short-token-filtered metric variant.
    """
    rows = included(profiles)
    out = []
    quality = {id(p): p.phones_per_utterance for p in rows}

    ordinals = np.asarray([p.severity_ordinal for p in rows], float)
    quality_values = np.asarray([quality[id(p)] for p in rows], float)
    if len(rows) >= 3:
        try:
            r = stats.spearman(quality_values, ordinals)
            out.append(["quality_vs_severity", "", r.coefficient, r.p_value, r.n, "ok", ""])
        except ConstantInput:
            out.append(["quality_vs_severity", "", None, None, len(rows),
                        "skipped", "constant_input"])
    else:
        out.append(["quality_vs_severity", "", None, None, len(rows),
                    "skipped", "too_few_pairs"])

    for metric in DPRIME_METRICS:
        members = [p for p in rows if metric in p.metrics]
        if len(members) < 4:
            out.append(["partial_vs_severity", metric, None, None, len(members),
                        "skipped", "too_few_pairs"])
            continue
        x = np.asarray([p.metrics[metric] for p in members], float)
        y = np.asarray([p.severity_ordinal for p in members], float)
        z = np.asarray([quality[id(p)] for p in members], float)
        try:
            r = stats.partial_spearman(x, y, z)
            out.append(["partial_vs_severity", metric, r.coefficient, r.p_value,
                        r.n, "ok", ""])
        except (ConstantInput, NearSingular, TooFewPairs) as exc:
            out.append(["partial_vs_severity", metric, None, None, len(members),
                        "skipped", type(exc).__name__])

    n_drop = int(np.floor(0.1 * len(rows)))
    ranked = sorted(rows, key=lambda p: (p.phones_per_utterance, p.corpus, p.speaker_id))
    kept = ranked[n_drop:]
    for metric in DPRIME_METRICS:
        values, ordin = _metric_pairs(kept, metric)
        rho, p, n, reason = _spearman_row(values, ordin)
        out.append(["bottom_decile_excluded", metric, rho, p, n,
                    "ok" if rho is not None else "skipped", reason])

    for metric in DPRIME_METRICS:
        values, ordin = _metric_pairs(rows, metric, source="filtered")
        rho, p, n, reason = _spearman_row(values, ordin)
        out.append(["short_token_filtered", metric, rho, p, n,
                    "ok" if rho is not None else "skipped", reason])
    return out


def _composite_consonant(profile: SpeakerProfile) -> float | None:
    present = [profile.metrics[m] for m in CONSONANT_DPRIME_METRICS
               if m in profile.metrics]
    if len(present) < 3:
        return None
    return float(np.mean(present))


def screening_report(profiles):
    """ROC tables for severe-vs-rest and moderate-or-worse-vs-rest."""
    rows = included(profiles)
    tasks = [
        ("severe_vs_rest", lambda p: p.severity_ordinal >= 3),
        ("moderate_or_worse_vs_rest", lambda p: p.severity_ordinal >= 2),
    ]
    features = list(METRIC_KEYS) + ["mean_consonant_dprime"]
    out = []
    for task_name, is_positive in tasks:
        for metric in features:
            scores = []
            labels = []
            for p in rows:
                if metric == "mean_consonant_dprime":
                    value = _composite_consonant(p)
                else:
                    value = p.metrics.get(metric)
                if value is None:
                    continue
                scores.append(value)
                labels.append(is_positive(p))
            if not scores or len(set(labels)) < 2:
                out.append([task_name, metric, None, None, None, None,
                            int(sum(labels)), int(len(labels) - sum(labels)),
                            "skipped", "single_class"])
                continue
            r = stats.roc(scores, labels, _ROC_DIRECTION[metric])
            out.append([task_name, metric, r.auc, r.optimal_threshold,
                        r.sensitivity, r.specificity, r.n_pos, r.n_neg, "ok", ""])
    return out


def aetiology_report(profiles, options: AnalysisOptions):
    """LOSO aetiology discrimination from the 12-metric profile."""
    rows = [p for p in profiles
            if not p.excluded and p.role == "patient" and p.aetiology]
    out = []
    if len(rows) < 4 or len({p.aetiology for p in rows}) < 2:
        out.append(["status", "", "skipped:too_few_patients"])
        return out
    x = np.full((len(rows), len(METRIC_KEYS)), np.nan)
    for i, p in enumerate(rows):
        for j, metric in enumerate(METRIC_KEYS):
            if metric in p.metrics:
                x[i, j] = p.metrics[metric]
    labels = [p.aetiology for p in rows]
    try:
        result = stats.logistic_loso(x, labels, l2=options.l2)
    except ClassTooSmall as exc:
        out.append(["status", "", f"skipped:ClassTooSmall:{exc}"])
        return out
    out.append(["status", "", "ok"])
    out.append(["accuracy", "", result.accuracy])
    out.append(["n_speakers", "", len(rows)])
    out.append(["n_classes", "", len(result.classes)])
    for name in result.classes:
        out.append(["recall", name, result.per_class_recall[name]])
    ranked = sorted(zip(METRIC_KEYS, result.coefficients),
                    key=lambda kv: -kv[1])
    for metric, coef in ranked:
        out.append(["coefficient", metric, float(coef)])
    return out


TABLE_HEADERS = {
    "correlations": ["feature", "rho", "p_value", "n", "ci_lower", "ci_upper",
                     "boot_iterations", "boot_skipped", "status", "reason"],
    "within_corpus": ["corpus", "feature", "rho", "p_value", "n"],
    "fdr": ["scope", "corpus", "feature", "p_raw", "p_adjusted", "significant"],
    "groups": ["feature", "n_control", "n_severe", "u_statistic", "p_value",
               "cliffs_delta", "status", "reason"],
    "meta": ["feature", "row_type", "corpus", "rho", "n", "k", "pooled_rho",
             "tau2", "i2", "q_stat", "dl_lower", "dl_upper", "hksj_lower",
             "hksj_upper", "hksj_p", "pi_lower", "pi_upper", "status", "reason"],
    "loco": ["feature", "corpus_removed", "n", "rho", "p_value",
             "delta_vs_full", "status", "reason"],
    "quartiles": ["feature", "quartile", "covariate_min", "covariate_max", "n",
                  "rho", "p_value", "status", "reason"],
    "alignment": ["analysis", "feature", "rho", "p_value", "n", "status", "reason"],
    "roc": ["task", "feature", "auc", "threshold", "sensitivity",
            "specificity", "n_pos", "n_neg", "status", "reason"],
    "aetiology": ["record", "key", "value"],
}


def analyze(profiles: list[SpeakerProfile], options: AnalysisOptions,
            out_dir, fmt: str = "csv", log: RunLog | None = None) -> None:
    """Run every corpus-level analysis and write the report tables."""
    log = log or RunLog()
    # canonical order: no reported statistic may depend on input ordering
    profiles = sorted(profiles, key=lambda p: (p.corpus, p.speaker_id))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log.add("analysis_params", seed=options.seed,
            bootstrap_iters=options.bootstrap_iters, fdr_q=options.fdr_q,
            n_profiles=len(profiles), n_included=len(included(profiles)))

    pooled, within, fdr = severity_correlation_report(profiles, options, log)
    tables = {
        "correlations": pooled,
        "within_corpus": within,
        "fdr": fdr,
        "groups": group_comparison_report(profiles),
        "meta": meta_report(profiles, log),
        "loco": loco_report(profiles),
        "roc": screening_report(profiles),
        "aetiology": aetiology_report(profiles, options),
    }
    try:
        tables["quartiles"] = quartile_report(profiles, options)
    except StratumTooSmall as exc:
        tables["quartiles"] = [["", "", None, None, 0, None, None,
                                "error", f"StratumTooSmall:{exc}"]]
        log.add("analysis_error", table="quartiles", error=str(exc))
    tables["alignment"] = alignment_report(profiles)

    for name in REPORT_FILES:
        _write_table(out, name, TABLE_HEADERS[name], tables[name], fmt)
    log.write(out / "run.jsonl")
