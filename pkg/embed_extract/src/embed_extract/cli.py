"""Command line entry points: extract and verify.

Exit codes: 0 success, 1 verification shortfall, 2 configuration errors,
3 data errors (unreadable or corrupt files, id collisions), 4 encoder
unavailable.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .encoder import DEFAULT_MODEL
from .errors import ConfigError, DataError, ModelUnavailable
from .extract import ExtractorConfig, extract
from .verify import verify


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-extract",
        description="Compute transformer document embeddings into an EMB1 table")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="encode a corpus CSV into an EMB1 file")
    p.add_argument("--corpus", required=True, help="CSV with a text column")
    p.add_argument("--out", required=True, help="EMB1 output path")
    p.add_argument("--model", default=DEFAULT_MODEL,
                   help="encoder checkpoint id or local path")
    p.add_argument("--pooling", choices=["mean", "first"], default="mean")
    p.add_argument("--max-len", dest="max_len", type=int, default=512)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=16)
    p.add_argument("--text-col", dest="text_col", default="text")
    p.add_argument("--label-col", dest="label_col", default="label",
                   help="label column; pass '' to keep unlabeled rows")

    p = sub.add_parser("verify", help="check an EMB1 file against its corpus")
    p.add_argument("--emb", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--text-col", dest="text_col", default="text")
    p.add_argument("--label-col", dest="label_col", default="label")
    return parser


def _label_col(value: str) -> Optional[str]:
    return value if value else None


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "extract":
            config = ExtractorConfig(
                corpus=args.corpus, out=args.out, model_id=args.model,
                pooling=args.pooling, max_length=args.max_len,
                batch_size=args.batch_size, text_col=args.text_col,
                label_col=_label_col(args.label_col))
            count = extract(config)
            print(f"wrote {count} embeddings to {args.out} "
                  f"({args.pooling} pooling, model {args.model})")
            return 0
        report = verify(args.emb, args.corpus, args.text_col,
                        _label_col(args.label_col))
        print(report.render())
        return 0 if report.ok else 1
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (DataError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except ModelUnavailable as err:
        print(f"error: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
