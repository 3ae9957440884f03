"""Command-line interface.

Subcommands: load, stats, train-clf, mask, infill, eval-leakage, mask-stats.
Exit codes: 0 success, 1 input error, 2 config error. All pipeline settings
can come from a ``key = value`` config file (--config) and every key is
overridable by the flag of the same name.
"""

from __future__ import annotations

import argparse
import sys

from .affinity import DomainAffinity
from .classifier import MultinomialDomainClassifier
from .corpus import load_corpus
from .evaluation import (
    LeakageReport,
    LeakageRow,
    leakage_eval,
    mask_count_report,
    write_report,
)
from .masking import MaskSpan, recover_masked_positions
from .pipeline import (
    DomainObfuscator,
    ObfuscationResult,
    PipelineConfig,
    _coerce_fields,
    naive_infill,
    read_results,
    write_results,
)
from .unmask import UnmaskTrace
from .validation import ConfigError, InputError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONFIG = 2

_CONFIG_FLAGS = (
    "tau1", "tau2", "tau2_quantile", "tau3", "saliency", "saliency_file",
    "unmask_strategy", "ngram_orders", "smoothing", "clf_smoothing",
    "min_doc_freq", "max_tokens", "mask_sentinel", "merge_consecutive",
    "ablation", "seed",
)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    g = parser.add_argument_group("pipeline settings")
    g.add_argument("--tau1")
    g.add_argument("--tau2", help="absolute step-2 threshold")
    g.add_argument("--tau2-quantile", dest="tau2_quantile")
    g.add_argument("--tau3")
    g.add_argument("--saliency", choices=["occlusion", "external"])
    g.add_argument("--saliency-file", dest="saliency_file")
    g.add_argument(
        "--unmask-strategy", dest="unmask_strategy",
        choices=["static", "greedy", "word-order"],
    )
    g.add_argument("--ngram-orders", dest="ngram_orders")
    g.add_argument("--smoothing", help="affinity smoothing per order, e.g. 1,5,7")
    g.add_argument("--clf-smoothing", dest="clf_smoothing")
    g.add_argument("--min-doc-freq", dest="min_doc_freq")
    g.add_argument("--max-tokens", dest="max_tokens")
    g.add_argument("--mask-sentinel", dest="mask_sentinel")
    g.add_argument("--merge-consecutive", dest="merge_consecutive")
    g.add_argument("--ablation", choices=["none", "no_init", "no_ott", "no_unmask"])
    g.add_argument("--seed")


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    overrides = {
        name: getattr(args, name)
        for name in _CONFIG_FLAGS
        if getattr(args, name, None) is not None
    }
    return config.replace(**_coerce_fields(overrides, "command line"))


def _cmd_load(args) -> int:
    corpus = load_corpus(args.corpus, max_tokens=int(args.max_tokens or 96))
    print(f"documents: {len(corpus)}")
    print(f"domains ({len(corpus.domains)}): {', '.join(corpus.domains)}")
    for d in corpus.domains:
        print(f"  {d}: {len(corpus.by_domain(d))}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    config = _build_config(args)
    corpus = load_corpus(args.corpus, max_tokens=config.max_tokens)
    table = DomainAffinity(
        smoothing=config.smoothing,
        min_doc_freq=config.min_doc_freq,
        orders=config.ngram_orders,
    ).fit(corpus)
    table.save(args.out)
    print(f"affinity table: {len(table.entries_)} keys over {len(table.domains_)} domains -> {args.out}")
    return EXIT_OK


def _cmd_train_clf(args) -> int:
    config = _build_config(args)
    corpus = load_corpus(args.corpus, max_tokens=config.max_tokens)
    model = MultinomialDomainClassifier(
        smoothing=config.clf_smoothing, mask_sentinel=config.mask_sentinel
    ).fit(corpus)
    model.save(args.out)
    print(f"domain classifier: |V|={len(model.vocabulary_)}, domains={list(model.domains_)} -> {args.out}")
    return EXIT_OK


def _cmd_mask(args) -> int:
    config = _build_config(args)
    corpus = load_corpus(args.corpus, max_tokens=config.max_tokens)
    obfuscator = DomainObfuscator(source=args.source, target=args.target, config=config)
    if args.table or args.clf:
        for domain in (args.source, args.target):
            if domain not in corpus.domains:
                raise InputError(
                    f"domain {domain!r} not in corpus domains {list(corpus.domains)}"
                )
        obfuscator.table_ = (
            DomainAffinity.load(args.table)
            if args.table
            else DomainAffinity(
                smoothing=config.smoothing,
                min_doc_freq=config.min_doc_freq,
                orders=config.ngram_orders,
            ).fit(corpus)
        )
        obfuscator.model_ = (
            MultinomialDomainClassifier.load(args.clf)
            if args.clf
            else MultinomialDomainClassifier(
                smoothing=config.clf_smoothing, mask_sentinel=config.mask_sentinel
            ).fit(corpus)
        )
        obfuscator.external_saliency_ = None
        if config.saliency == "external":
            from .saliency import load_external_saliency

            obfuscator.external_saliency_ = load_external_saliency(
                config.saliency_file, corpus
            )
    else:
        obfuscator.fit(corpus)
    results = obfuscator.transform(corpus.by_domain(args.source))
    write_results(results, args.out)
    print(f"masked {len(results)} documents {args.source} -> {args.target} -> {args.out}")
    return EXIT_OK


def _results_from_records(records, corpus, sentinel: str) -> list[ObfuscationResult]:
    """Rebuild result objects from a masked-output file. Step-1/2 mask
    positions come from the renders, so the file must have been produced with
    merge_consecutive off."""
    docs = {doc.id: doc for doc in corpus}
    results = []
    for rec in records:
        doc = docs.get(rec.get("id"))
        if doc is None:
            raise InputError(f"masked output references unknown doc id {rec.get('id')!r}")
        spans3 = tuple(
            MaskSpan(s["start"], s["length"], s["step"], s["score"])
            for s in rec.get("spans", ())
        )
        try:
            pos1 = recover_masked_positions(rec["masked_step1"], doc.tokens, sentinel)
            pos2 = recover_masked_positions(rec["masked_step2"], doc.tokens, sentinel)
        except InputError as exc:
            raise InputError(
                f"doc {doc.id!r}: cannot recover mask positions from renders "
                f"(was the file written with merge_consecutive on?): {exc}"
            ) from exc
        trace = None
        if rec.get("trace"):
            t = rec["trace"]
            trace = UnmaskTrace(
                candidate_gains=tuple((p, g) for p, g in t["candidate_gains"]),
                restored=tuple(t["restored"]),
                stop_reason=t["stop_reason"],
                final_confidence=t["final_confidence"],
            )
        results.append(
            ObfuscationResult(
                doc=doc,
                source=rec["source"],
                target=rec["target"],
                spans_step1=tuple(MaskSpan(p, 1, "step1", 0.0) for p in sorted(pos1)),
                spans_step2=tuple(MaskSpan(p, 1, "step2", 0.0) for p in sorted(pos2)),
                spans_step3=spans3,
                masked_step1=rec["masked_step1"],
                masked_step2=rec["masked_step2"],
                masked_step3=rec["masked_step3"],
                trace=trace,
            )
        )
    return results


def _cmd_infill(args) -> int:
    config = _build_config(args)
    corpus = load_corpus(args.corpus, max_tokens=config.max_tokens)
    table = DomainAffinity.load(args.table)
    records = read_results(args.masked)
    results = _results_from_records(records, corpus, config.mask_sentinel)
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", encoding="utf-8")
    try:
        import json

        for r in results:
            text = naive_infill(r, table, args.target, seed=config.seed)
            out.write(
                json.dumps(
                    {"id": r.doc.id, "source": r.source, "target": args.target, "text": text},
                    ensure_ascii=False,
                )
                + "\n"
            )
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"infilled {len(results)} documents toward {args.target}", file=sys.stderr)
    return EXIT_OK


def _cmd_eval_leakage(args) -> int:
    config = _build_config(args)
    corpus = load_corpus(args.corpus, max_tokens=config.max_tokens)
    records = read_results(args.masked)
    results = _results_from_records(records, corpus, config.mask_sentinel)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    n_seeds = int(args.seeds)
    reports = [
        leakage_eval(
            corpus,
            results,
            sizes,
            seed=config.seed + i,
            smoothing=config.clf_smoothing,
            mask_sentinel=config.mask_sentinel,
        )
        for i in range(n_seeds)
    ]
    rows = []
    for j, size in enumerate(sizes):
        rows.append(
            LeakageRow(
                size=size,
                accuracy_raw=sum(r.rows[j].accuracy_raw for r in reports) / n_seeds,
                accuracy_step1=sum(r.rows[j].accuracy_step1 for r in reports) / n_seeds,
                accuracy_full=sum(r.rows[j].accuracy_full for r in reports) / n_seeds,
            )
        )
    averaged = LeakageReport(rows=tuple(rows), seed=config.seed)
    print(f"averaged over {n_seeds} seed(s), base seed {config.seed}")
    print(averaged.format_table())
    if args.out:
        write_report(averaged.to_records(), args.out)
    return EXIT_OK


def _cmd_mask_stats(args) -> int:
    config = _build_config(args)
    corpus = load_corpus(args.corpus, max_tokens=config.max_tokens)
    records = read_results(args.masked)
    results = _results_from_records(records, corpus, config.mask_sentinel)
    report = mask_count_report(results)
    if args.by_pair:
        print(report.format_grid())
    else:
        n = len(results)
        a1 = sum(sum(s.length for s in r.spans_step1) for r in results) / n
        a2 = sum(sum(s.length for s in r.spans_step2) for r in results) / n
        a3 = sum(sum(s.length for s in r.spans_step3) for r in results) / n
        print(f"average masked tokens over {n} documents: "
              f"step1 {a1:.2f}, +step2 {a2:.2f}, +step3 {a3:.2f}")
    if args.out:
        write_report(report.to_records(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="remask",
        description="Mask domain-specific cues in text and evaluate the obfuscation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load", help="validate a corpus file and print counts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--max-tokens", dest="max_tokens")
    p.set_defaults(func=_cmd_load)

    p = sub.add_parser("stats", help="build and export the n-gram affinity table")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("train-clf", help="train and export the domain classifier")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_train_clf)

    p = sub.add_parser("mask", help="run the masking pipeline for one domain pair")
    p.add_argument("--corpus", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--table", help="pre-built affinity table (default: fit from corpus)")
    p.add_argument("--clf", help="pre-trained classifier (default: fit from corpus)")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("infill", help="replace final masks with target-domain unigrams")
    p.add_argument("--corpus", required=True)
    p.add_argument("--masked", required=True, help="masked-output file from `remask mask`")
    p.add_argument("--table", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", help="output file, '-' for stdout")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_infill)

    p = sub.add_parser("eval-leakage", help="domain classification accuracy on masked text")
    p.add_argument("--corpus", required=True)
    p.add_argument("--masked", required=True)
    p.add_argument("--sizes", required=True, help="training sizes, e.g. 400,1000,10000")
    p.add_argument("--seeds", default="1", help="number of seeds to average over")
    p.add_argument("--out", help="write the report as JSON")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_eval_leakage)

    p = sub.add_parser("mask-stats", help="average mask counts per step")
    p.add_argument("--corpus", required=True)
    p.add_argument("--masked", required=True)
    p.add_argument("--by-pair", action="store_true", help="grid per (source, target) pair")
    p.add_argument("--out", help="write the report as JSON")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_mask_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
