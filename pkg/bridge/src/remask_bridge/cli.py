"""Bridge command line: fine-tune, serve, score."""

from __future__ import annotations

import argparse
import sys

from .finetune import CorpusFormatError, fine_tune
from .protocol import score_batch, serve
from .scorer import DEFAULT_LAYERS, AttentionScorer


def _add_scorer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True, help="checkpoint directory")
    parser.add_argument(
        "--layers", default=",".join(str(l) for l in DEFAULT_LAYERS),
        help="1-indexed encoder layers to aggregate, e.g. 3,4",
    )
    parser.add_argument("--agg", choices=["mean", "max"], default="mean")
    parser.add_argument(
        "--attention", choices=["norm", "score"], default="norm",
        help="'score' uses raw attention weights instead of norms",
    )


def _scorer(args) -> AttentionScorer:
    layers = tuple(int(p) for p in args.layers.split(",") if p.strip())
    return AttentionScorer(
        args.model, layers=layers, aggregation=args.agg, attention=args.attention
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="remask-bridge",
        description="Transformer attention-saliency scorer over line-delimited JSON.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fine-tune", help="train a domain classifier checkpoint")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden-size", type=int, default=96)
    p.add_argument("--vocab-size", type=int, default=2000)

    p = sub.add_parser("serve", help="one response line per request line on stdio")
    _add_scorer_flags(p)

    p = sub.add_parser("score", help="batch-score requests into a saliency file")
    _add_scorer_flags(p)
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", dest="out_path", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "fine-tune":
            out = fine_tune(
                args.corpus,
                args.out,
                epochs=args.epochs,
                seed=args.seed,
                hidden_size=args.hidden_size,
                vocab_size=args.vocab_size,
            )
            print(f"checkpoint -> {out}")
        elif args.command == "serve":
            serve(_scorer(args))
        else:
            n = score_batch(_scorer(args), args.in_path, args.out_path)
            print(f"scored {n} requests -> {args.out_path}")
    except CorpusFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
