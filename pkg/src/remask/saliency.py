"""Per-token domain-importance scores and over-the-top masking.

The built-in provider is occlusion: the drop in origin-domain probability
when one token is removed. External providers (attention norms or scores from
a transformer bridge) are loaded from a JSONL interchange file whose records
carry ``doc_id``, ``tokens``, ``scores`` and ``provider``; the token list must
match the corpus tokenization exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .classifier import MultinomialDomainClassifier
from .corpus import Corpus, Document
from .masking import STEP2, MaskedDocument, MaskSpan
from .validation import ConfigError, InputError, require

OCCLUSION = "occlusion"
EXTERNAL_ATTENTION_NORM = "external_attention_norm"
EXTERNAL_ATTENTION_SCORE = "external_attention_score"
PROVIDERS = (OCCLUSION, EXTERNAL_ATTENTION_NORM, EXTERNAL_ATTENTION_SCORE)

DEFAULT_TAU2_QUANTILE = 0.8


@dataclass(frozen=True)
class SaliencyVector:
    """Per-token scores parallel to a document's tokens."""

    doc_id: str
    provider: str
    scores: tuple[float, ...]

    def __post_init__(self):
        require(self.provider in PROVIDERS, f"unknown saliency provider {self.provider!r}")
        if self.provider == EXTERNAL_ATTENTION_NORM:
            require(
                all(s >= 0 for s in self.scores),
                f"doc {self.doc_id!r}: attention norms must be non-negative",
            )


@dataclass(frozen=True)
class ThresholdPolicy:
    """Step-2 threshold: a fixed value, or a per-document score quantile."""

    kind: str
    value: float

    @classmethod
    def absolute(cls, value: float) -> "ThresholdPolicy":
        return cls("absolute", float(value))

    @classmethod
    def quantile(cls, q: float = DEFAULT_TAU2_QUANTILE) -> "ThresholdPolicy":
        if not 0.0 < q < 1.0:
            raise ConfigError(f"tau2 quantile must lie in (0, 1), got {q}")
        return cls("quantile", float(q))

    def resolve(self, scores: Sequence[float]) -> float:
        if self.kind == "absolute":
            return self.value
        if not scores:
            return float("inf")
        return float(np.quantile(np.asarray(scores, dtype=float), self.value))


def occlusion_saliency(
    doc: Document, model: MultinomialDomainClassifier, source: str
) -> SaliencyVector:
    """score(i) = f(tokens) - f(tokens without position i), where f is the
    source-domain probability. Positive scores support the source domain;
    tokens outside the model vocabulary score exactly 0."""
    tokens = list(doc.tokens)
    base = model.proba(tokens, source)
    # identical tokens get identical scores, so compute each distinct one once
    cache: dict[str, float] = {}
    scores = []
    for i, t in enumerate(tokens):
        if t in cache:
            scores.append(cache[t])
            continue
        reduced = model.proba(tokens[:i] + tokens[i + 1 :], source)
        cache[t] = base - reduced
        scores.append(cache[t])
    return SaliencyVector(doc_id=doc.id, provider=OCCLUSION, scores=tuple(scores))


def load_external_saliency(
    path: str | Path, corpus: Corpus
) -> dict[str, SaliencyVector]:
    """Load an interchange file and validate each vector against the corpus:
    unknown ids, token mismatches and length mismatches all name the doc_id."""
    docs = {doc.id: doc for doc in corpus}
    out: dict[str, SaliencyVector] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}: line {lineno}: invalid JSON ({exc})") from exc
            try:
                doc_id = rec["doc_id"]
                tokens = rec["tokens"]
                scores = rec["scores"]
                provider = rec.get("provider", EXTERNAL_ATTENTION_NORM)
            except KeyError as exc:
                raise InputError(f"{path}: line {lineno}: missing field {exc}") from exc
            doc = docs.get(doc_id)
            if doc is None:
                raise InputError(f"{path}: unknown doc_id {doc_id!r}")
            if len(scores) != len(doc.tokens):
                raise InputError(
                    f"{path}: doc_id {doc_id!r}: {len(scores)} scores for "
                    f"{len(doc.tokens)} tokens"
                )
            if tuple(tokens) != doc.tokens:
                raise InputError(
                    f"{path}: doc_id {doc_id!r}: token list does not match corpus tokenization"
                )
            out[doc_id] = SaliencyVector(
                doc_id=doc_id, provider=provider, scores=tuple(float(s) for s in scores)
            )
    return out


def save_saliency(vectors: Mapping[str, SaliencyVector], corpus: Corpus, path: str | Path) -> None:
    docs = {doc.id: doc for doc in corpus}
    with open(path, "w", encoding="utf-8") as f:
        for doc_id in sorted(vectors):
            v = vectors[doc_id]
            rec = {
                "doc_id": doc_id,
                "tokens": list(docs[doc_id].tokens),
                "scores": list(v.scores),
                "provider": v.provider,
            }
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def mask_step2(
    md: MaskedDocument,
    sal: SaliencyVector,
    policy: ThresholdPolicy,
) -> MaskedDocument:
    """Add unigram spans at every unmasked position whose saliency strictly
    exceeds the resolved threshold. Existing spans are never touched."""
    require(
        len(sal.scores) == len(md.doc),
        f"doc {md.doc.id!r}: saliency has {len(sal.scores)} scores for "
        f"{len(md.doc)} tokens",
    )
    threshold = policy.resolve(sal.scores)
    hidden = md.masked_positions()
    new = [
        MaskSpan(i, 1, STEP2, s)
        for i, s in enumerate(sal.scores)
        if i not in hidden and s > threshold
    ]
    return md.add_spans(new)
