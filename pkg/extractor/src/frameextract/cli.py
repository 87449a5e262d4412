"""CLI: extract frame embeddings from audio manifests.

    frameextract extract --manifest M.json --model NAME --layer N --out DIR
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import FrameExtractError
from .extract import DEFAULT_MODEL, batch_extract


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frameextract",
        description="Frame-embedding extraction with frozen speech encoders")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("extract", help="extract a manifest of audio files")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model", default=DEFAULT_MODEL)
    p.add_argument("--layer", type=int, default=None,
                   help="hidden layer index (default: the final hidden layer)")
    p.add_argument("--final-norm", choices=("model", "apply"), default="model")
    p.add_argument("--workers", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        results = batch_extract(args.manifest, args.out, args.model,
                                args.layer, args.final_norm, args.workers)
    except FrameExtractError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3
    failed = sum(1 for r in results if r["status"] == "failed")
    print(json.dumps({"total": len(results), "failed": failed}))
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
