"""Command-line interface.

Subcommands:
    synth       generate a synthetic corpus with known separability
    tokens      pool TextGrid + frame files into phone token tables
    directions  estimate and export feature directions from controls
    profile     build per-speaker profiles from a manifest
    analyze     run every corpus-level analysis over a profiles file

Exit codes: 0 ok, 2 usage error, 3 data error, 4 numeric failure.  Fatal
errors emit a one-line JSON record on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import embedio, pipeline, synth
from .errors import NUMERIC_ERRORS, PhonoProfileError
from .featconfig import ALL_FEATURES, load_language_config
from .manifest import load_manifest
from .pipeline import AnalysisOptions, ProfileOptions, RunLog


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--bootstrap-iters", type=int, default=1000)
    parser.add_argument("--min-tokens", type=int, default=5)
    parser.add_argument("--subsample-n", type=int, default=30)
    parser.add_argument("--subsample-reps", type=int, default=100)
    parser.add_argument("--min-duration-ms", type=float, default=0.0,
                        help="drop phone tokens shorter than this many ms (0 = off)")
    parser.add_argument("--format", choices=("csv", "jsonl"), default="csv")


def _config_overrides(pairs):
    overrides = {}
    for pair in pairs or []:
        lang, _, path = pair.partition("=")
        if not lang or not path:
            raise PhonoProfileError(f"--config expects lang=path, got {pair!r}")
        overrides[lang] = load_language_config(Path(path).read_text("utf-8"))
    return overrides


def _profile_options(args) -> ProfileOptions:
    return ProfileOptions(
        seed=args.seed,
        min_tokens=args.min_tokens,
        min_duration=args.min_duration_ms / 1000.0,
        subsample=getattr(args, "subsample", False),
        subsample_n=args.subsample_n,
        subsample_reps=args.subsample_reps,
        workers=getattr(args, "workers", 1),
        tier=getattr(args, "tier", None),
    )


def _cmd_synth(args) -> int:
    spec = synth.SynthSpec(
        dim=args.dim,
        speakers_per_level=tuple(args.speakers_per_level),
        tokens_per_class=args.tokens_per_class,
        separation=tuple(args.schedule),
        noise_sigma=args.noise,
        seed=args.seed,
        corner_tokens=args.corner_tokens,
        n_corpora=args.corpora,
        control_corpus_split=args.control_corpus_split,
        tokens_jitter=args.jitter,
        aetiologies=tuple(args.aetiologies.split(",")) if args.aetiologies else ("synthetic",),
        aetiology_scale=args.aetiology_scale,
    )
    synth.generate(spec, args.out)
    return 0


def _cmd_tokens(args) -> int:
    manifest = load_manifest(args.manifest)
    configs = pipeline.load_configs(manifest, _config_overrides(args.config))
    out = Path(args.out)
    (out / "tokens").mkdir(parents=True, exist_ok=True)
    doc = {"corpora": [], "language_configs": {}, "speakers": []}
    for name in sorted(manifest.corpora):
        entry = manifest.corpora[name]
        row = {"name": entry.name, "language": entry.language}
        if entry.aetiology:
            row["aetiology"] = entry.aetiology
        if entry.control_corpus:
            row["control_corpus"] = entry.control_corpus
        doc["corpora"].append(row)
    for lang, path in sorted(manifest.language_configs.items()):
        target = out / f"config_{lang}.json"
        target.write_text(Path(path).read_text("utf-8"), "utf-8")
        doc["language_configs"][lang] = target.name
    for speaker in sorted(manifest.speakers, key=lambda s: (s.corpus, s.speaker_id)):
        tokens, _ = pipeline.load_speaker_tokens(
            speaker, configs[speaker.language], args.tier)
        rel = f"tokens/{speaker.corpus}__{speaker.speaker_id}.pet"
        if tokens:
            embedio.write_tokens(tokens, out / rel)
        else:
            embedio.write_tokens(tokens, out / rel, dim=1)
        row = {
            "speaker_id": speaker.speaker_id,
            "corpus": speaker.corpus,
            "language": speaker.language,
            "role": speaker.role,
            "token_table_path": rel,
        }
        if speaker.aetiology:
            row["aetiology"] = speaker.aetiology
        if speaker.severity is not None:
            row["severity_label"] = speaker.severity.label
        doc["speakers"].append(row)
    (out / "manifest_tokens.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False), "utf-8")
    return 0


def _cmd_directions(args) -> int:
    manifest = load_manifest(args.manifest)
    configs = pipeline.load_configs(manifest, _config_overrides(args.config))
    options = _profile_options(args)
    log = RunLog()
    profiles = pipeline.build_profiles(manifest, configs, options, log)
    del profiles  # directions are a side product recorded in the log
    records = [e for e in log.events if e["event"].startswith("direction")]
    Path(args.out).write_text(
        "\n".join(json.dumps(r, sort_keys=True) for r in records) + "\n", "utf-8")
    return 0


def _cmd_profile(args) -> int:
    manifest = load_manifest(args.manifest)
    configs = pipeline.load_configs(manifest, _config_overrides(args.config))
    options = _profile_options(args)
    log = RunLog()
    log.add("profile_params", seed=options.seed, min_tokens=options.min_tokens,
            min_duration=options.min_duration, subsample=options.subsample,
            subsample_n=options.subsample_n, subsample_reps=options.subsample_reps,
            workers=options.workers)
    result = pipeline.build_profiles(manifest, configs, options, log)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    pipeline.write_profiles_csv(result, out)
    if args.log:
        log.write(Path(args.log))
    return 0


def _cmd_analyze(args) -> int:
    profiles = pipeline.read_profiles_csv(args.profiles)
    quartile_features = tuple(
        f"{name}_dprime" if not name.endswith("_dprime") and name in ALL_FEATURES else name
        for name in args.quartile_features.split(","))
    options = AnalysisOptions(
        seed=args.seed,
        bootstrap_iters=args.bootstrap_iters,
        quartile_features=quartile_features,
    )
    pipeline.analyze(profiles, options, args.out, args.format)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonoprofile",
        description="Phonological contrast profiling of speech embeddings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--speakers-per-level", type=int, nargs=4, default=[50, 50, 50, 50])
    p.add_argument("--tokens-per-class", type=int, default=100)
    p.add_argument("--schedule", type=float, nargs=4, default=[3.0, 2.0, 1.0, 0.5])
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--corner-tokens", type=int, default=10)
    p.add_argument("--corpora", type=int, default=1)
    p.add_argument("--control-corpus-split", action="store_true")
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--aetiologies", default="")
    p.add_argument("--aetiology-scale", type=float, default=0.0)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("tokens", help="pool TextGrids + frames into token tables")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tier", default=None)
    p.add_argument("--config", action="append", metavar="LANG=PATH")
    p.set_defaults(func=_cmd_tokens)

    p = sub.add_parser("directions", help="export control feature directions")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tier", default=None)
    p.add_argument("--config", action="append", metavar="LANG=PATH")
    p.set_defaults(func=_cmd_directions)

    p = sub.add_parser("profile", help="build speaker profiles from a manifest")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--log", default=None, help="also write a JSONL run log here")
    p.add_argument("--tier", default=None)
    p.add_argument("--config", action="append", metavar="LANG=PATH")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--subsample", action="store_true",
                   help="replace d' with its fixed-token subsampled estimate")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("analyze", help="run corpus-level analyses over profiles")
    _add_common(p)
    p.add_argument("--profiles", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--quartile-features", default="nasality_dprime")
    p.set_defaults(func=_cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NUMERIC_ERRORS as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 4
    except PhonoProfileError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(json.dumps({"error": "FileNotFound", "message": str(exc)}),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
