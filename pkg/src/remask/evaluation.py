"""Diagnostics over pipeline outputs: domain-leakage classification and
per-step mask-count statistics.

The leakage probe trains a fresh bag-of-words domain classifier on each text
variant (raw, after the first masking step, after the full pipeline) and
reports held-out accuracy per training-set size; lower accuracy on masked
text means better obfuscation. Reports are directional analogues of the
transformer-based originals, and say so in their headers.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .classifier import MultinomialDomainClassifier
from .corpus import Corpus, Document
from .masking import MaskSpan
from .pipeline import ObfuscationResult
from .validation import InputError, require

HOLDOUT_FRACTION = 0.2

RAW = "raw"
STEP1_MASKED = "step1"
FULLY_MASKED = "full"
VARIANTS = (RAW, STEP1_MASKED, FULLY_MASKED)


@dataclass(frozen=True)
class LeakageRow:
    size: int
    accuracy_raw: float
    accuracy_step1: float
    accuracy_full: float


@dataclass(frozen=True)
class LeakageReport:
    rows: tuple[LeakageRow, ...]
    seed: int

    def __post_init__(self):
        sizes = [r.size for r in self.rows]
        require(sizes == sorted(set(sizes)), f"sizes must be strictly increasing: {sizes}")
        for r in self.rows:
            for acc in (r.accuracy_raw, r.accuracy_step1, r.accuracy_full):
                require(0.0 <= acc <= 1.0, f"accuracy {acc} outside [0, 1]")

    def format_table(self) -> str:
        lines = [
            "domain leakage: bag-of-words probe accuracy on masked text "
            "(directional analogue)",
            f"{'size':>8}  {'raw':>8}  {'step1':>8}  {'full':>8}",
        ]
        for r in self.rows:
            lines.append(
                f"{r.size:>8}  {r.accuracy_raw:>8.3f}  {r.accuracy_step1:>8.3f}  "
                f"{r.accuracy_full:>8.3f}"
            )
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        return [
            {
                "size": r.size,
                "accuracy_raw": r.accuracy_raw,
                "accuracy_step1": r.accuracy_step1,
                "accuracy_full": r.accuracy_full,
            }
            for r in self.rows
        ]


def _variant_tokens(doc: Document, spans: Sequence[MaskSpan], sentinel: str) -> tuple[str, ...]:
    hidden = {p for s in spans for p in s.positions()}
    return tuple(sentinel if i in hidden else t for i, t in enumerate(doc.tokens))


def _variant_document(doc: Document, tokens: tuple[str, ...]) -> Document:
    return Document(id=doc.id, domain=doc.domain, tokens=tokens, stems=tokens)


def _stratified_split(corpus: Corpus, rng: random.Random):
    pool, held_out = [], []
    for domain in corpus.domains:
        docs = corpus.by_domain(domain)
        order = list(range(len(docs)))
        rng.shuffle(order)
        n_test = max(1, round(len(docs) * HOLDOUT_FRACTION))
        held_out.extend(docs[i] for i in order[:n_test])
        pool.extend(docs[i] for i in order[n_test:])
    return pool, held_out


def _stratified_sample(pool: Sequence[Document], domains, size: int, rng: random.Random):
    by_domain = {d: [doc for doc in pool if doc.domain == d] for d in domains}
    total = len(pool)
    require(
        size <= total,
        f"training size {size} exceeds the {total} available documents",
    )
    # largest-remainder allocation proportional to pool composition
    quotas = {d: size * len(by_domain[d]) / total for d in domains}
    counts = {d: int(quotas[d]) for d in domains}
    remainder = size - sum(counts.values())
    for d in sorted(domains, key=lambda d: (quotas[d] - counts[d]), reverse=True):
        if remainder <= 0:
            break
        if counts[d] < len(by_domain[d]):
            counts[d] += 1
            remainder -= 1
    sample = []
    for d in domains:
        docs = list(by_domain[d])
        rng.shuffle(docs)
        sample.extend(docs[: counts[d]])
    return sample


def leakage_eval(
    corpus: Corpus,
    results: Sequence[ObfuscationResult],
    sizes: Sequence[int],
    seed: int = 0,
    smoothing: float = 1.0,
    mask_sentinel: str = "<m>",
) -> LeakageReport:
    """For each training size: train a fresh classifier on a seeded stratified
    sample of each text variant and report accuracy on a held-out 20% split.
    The masked outputs must cover every corpus document."""
    sizes = list(sizes)
    require(sizes == sorted(set(sizes)), f"sizes must be strictly increasing: {sizes}")
    by_id = {r.doc.id: r for r in results}
    missing = [doc.id for doc in corpus if doc.id not in by_id]
    if missing:
        raise InputError(
            f"masked outputs do not cover the corpus; {len(missing)} missing, "
            f"first: {missing[:3]}"
        )

    variant_docs: dict[str, dict[str, Document]] = {v: {} for v in VARIANTS}
    for doc in corpus:
        r = by_id[doc.id]
        variant_docs[RAW][doc.id] = doc
        variant_docs[STEP1_MASKED][doc.id] = _variant_document(
            doc, _variant_tokens(doc, r.spans_step1, mask_sentinel)
        )
        variant_docs[FULLY_MASKED][doc.id] = _variant_document(
            doc, _variant_tokens(doc, r.spans_step3, mask_sentinel)
        )

    rng = random.Random(seed)
    pool, held_out = _stratified_split(corpus, rng)

    rows = []
    for size in sizes:
        sample = _stratified_sample(pool, corpus.domains, size, rng)
        accuracies = {}
        for variant in VARIANTS:
            docs = variant_docs[variant]
            train_docs = tuple(docs[d.id] for d in sample)
            model = MultinomialDomainClassifier(
                smoothing=smoothing, mask_sentinel=mask_sentinel
            ).fit(Corpus(documents=train_docs, domains=corpus.domains))
            correct = sum(
                model.predict(docs[d.id].tokens) == d.domain for d in held_out
            )
            accuracies[variant] = correct / len(held_out)
        rows.append(
            LeakageRow(
                size=size,
                accuracy_raw=accuracies[RAW],
                accuracy_step1=accuracies[STEP1_MASKED],
                accuracy_full=accuracies[FULLY_MASKED],
            )
        )
    return LeakageReport(rows=tuple(rows), seed=seed)


@dataclass(frozen=True)
class MaskCountReport:
    """Average masked-token counts per step for each (source, target) pair."""

    pairs: dict[tuple[str, str], tuple[float, float, float]]

    def __post_init__(self):
        for (s, t), (a1, a2, a3) in self.pairs.items():
            require(a2 >= a1, f"pair {s}->{t}: step2 average {a2} below step1 {a1}")
            require(a3 <= a2, f"pair {s}->{t}: step3 average {a3} above step2 {a2}")

    def format_grid(self) -> str:
        sources = sorted({s for s, _ in self.pairs})
        targets = sorted({t for _, t in self.pairs})
        sub = f"{'step1':>7} {'+step2':>7} {'+step3':>7}"
        header1 = f"{'':>10} " + " | ".join(f"{t:^23}" for t in targets)
        header2 = f"{'source':>10} " + " | ".join(sub for _ in targets)
        lines = [
            "average masked tokens per step by (source -> target) pair",
            header1,
            header2,
        ]
        for s in sources:
            cells = []
            for t in targets:
                avg = self.pairs.get((s, t))
                if avg is None:
                    cells.append(f"{'-':>7} {'-':>7} {'-':>7}")
                else:
                    cells.append(f"{avg[0]:>7.2f} {avg[1]:>7.2f} {avg[2]:>7.2f}")
            lines.append(f"{s:>10} " + " | ".join(cells))
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        return [
            {"source": s, "target": t, "step1": a1, "step2": a2, "step3": a3}
            for (s, t), (a1, a2, a3) in sorted(self.pairs.items())
        ]


def _masked_token_count(spans: Sequence[MaskSpan]) -> int:
    return sum(s.length for s in spans)


def mask_count_report(results: Sequence[ObfuscationResult]) -> MaskCountReport:
    """Arithmetic mean of masked-token counts per step, grouped by pair."""
    require(bool(results), "no results to report on")
    grouped: dict[tuple[str, str], list[tuple[int, int, int]]] = {}
    for r in results:
        grouped.setdefault((r.source, r.target), []).append(
            (
                _masked_token_count(r.spans_step1),
                _masked_token_count(r.spans_step2),
                _masked_token_count(r.spans_step3),
            )
        )
    pairs = {}
    for pair, counts in grouped.items():
        n = len(counts)
        pairs[pair] = (
            sum(c[0] for c in counts) / n,
            sum(c[1] for c in counts) / n,
            sum(c[2] for c in counts) / n,
        )
    return MaskCountReport(pairs=pairs)


def write_report(records: list[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(records, f, ensure_ascii=False, indent=2)
