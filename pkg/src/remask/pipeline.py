"""Per-document orchestration of the three masking steps.

A document flows through affinity masking, saliency over-masking and guarded
unmasking; every intermediate state is kept in the result. Ablation switches
drop individual steps. The masked-output file is JSONL, one record per
document with the renders after each step, the final spans and the unmasking
trace.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator

from .affinity import (
    DEFAULT_MIN_DOC_FREQ,
    DEFAULT_SMOOTHING,
    DEFAULT_TAU1,
    DomainAffinity,
    mask_step1,
)
from .classifier import DEFAULT_LIKELIHOOD_SMOOTHING, MultinomialDomainClassifier
from .corpus import Corpus, DEFAULT_MAX_TOKENS, Document
from .masking import MASK_SENTINEL, MaskedDocument, MaskSpan, render
from .saliency import (
    DEFAULT_TAU2_QUANTILE,
    OCCLUSION,
    SaliencyVector,
    ThresholdPolicy,
    mask_step2,
    occlusion_saliency,
)
from .unmask import DEFAULT_TAU3, STRATEGIES, STATIC_ASCENDING, UnmaskTrace, unmask_step3
from .validation import ConfigError, InputError, require

ABLATION_NONE = "none"
ABLATION_NO_INIT = "no_init"
ABLATION_NO_OTT = "no_ott"
ABLATION_NO_UNMASK = "no_unmask"
ABLATIONS = (ABLATION_NONE, ABLATION_NO_INIT, ABLATION_NO_OTT, ABLATION_NO_UNMASK)

INFILL_TOP_K = 20


@dataclass(frozen=True)
class PipelineConfig:
    """All thresholds, strategy selectors and constants for one run."""

    tau1: float = DEFAULT_TAU1
    tau2: float | None = None  # absolute threshold; None selects the quantile
    tau2_quantile: float = DEFAULT_TAU2_QUANTILE
    tau3: float = DEFAULT_TAU3
    saliency: str = OCCLUSION  # "occlusion" or "external"
    saliency_file: str | None = None
    unmask_strategy: str = STATIC_ASCENDING
    ngram_orders: tuple[int, ...] = (1, 2, 3)
    smoothing: tuple[float, float, float] = DEFAULT_SMOOTHING
    clf_smoothing: float = DEFAULT_LIKELIHOOD_SMOOTHING
    min_doc_freq: int = DEFAULT_MIN_DOC_FREQ
    max_tokens: int = DEFAULT_MAX_TOKENS
    mask_sentinel: str = MASK_SENTINEL
    merge_consecutive: bool = False
    ablation: str = ABLATION_NONE
    seed: int = 0

    def __post_init__(self):
        if self.saliency_file and self.saliency == OCCLUSION:
            object.__setattr__(self, "saliency", "external")
        if not self.tau1 > 0:
            raise ConfigError(f"tau1 must be positive, got {self.tau1}")
        if not 0.0 < self.tau3 < 1.0:
            raise ConfigError(f"tau3 must lie in (0, 1), got {self.tau3}")
        if self.tau2 is None and not 0.0 < self.tau2_quantile < 1.0:
            raise ConfigError(
                f"tau2 quantile must lie in (0, 1), got {self.tau2_quantile}"
            )
        if self.ablation not in ABLATIONS:
            raise ConfigError(f"unknown ablation {self.ablation!r}; choose from {ABLATIONS}")
        if self.unmask_strategy not in STRATEGIES:
            raise ConfigError(
                f"unknown unmask strategy {self.unmask_strategy!r}; choose from {STRATEGIES}"
            )
        if self.saliency not in (OCCLUSION, "external"):
            raise ConfigError(
                f"saliency must be 'occlusion' or 'external', got {self.saliency!r}"
            )
        if self.saliency == "external" and not self.saliency_file:
            raise ConfigError("saliency 'external' requires saliency_file")

    @property
    def tau2_policy(self) -> ThresholdPolicy:
        if self.tau2 is not None:
            return ThresholdPolicy.absolute(self.tau2)
        return ThresholdPolicy.quantile(self.tau2_quantile)

    def replace(self, **overrides) -> "PipelineConfig":
        return dataclasses.replace(self, **overrides)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        """Parse a ``key = value`` config file; keys match the CLI flags."""
        overrides = {}
        with open(path, encoding="utf-8") as f:
            for lineno, raw in enumerate(f, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}: line {lineno}: expected key = value")
                key, value = (part.strip() for part in line.split("=", 1))
                overrides[key.replace("-", "_")] = value
        return cls().replace(**_coerce_fields(overrides, path))


def _coerce_fields(overrides: dict[str, str], origin) -> dict:
    fields = {f.name: f for f in dataclasses.fields(PipelineConfig)}
    out = {}
    for key, raw in overrides.items():
        if key not in fields:
            raise ConfigError(f"{origin}: unknown config key {key!r}")
        try:
            out[key] = _coerce_value(key, raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{origin}: bad value for {key}: {raw!r} ({exc})") from exc
    return out


def _coerce_value(key: str, raw: str):
    if key in ("tau1", "tau2_quantile", "tau3", "clf_smoothing"):
        return float(raw)
    if key == "tau2":
        return None if raw.lower() in ("", "none") else float(raw)
    if key in ("min_doc_freq", "max_tokens", "seed"):
        return int(raw)
    if key == "merge_consecutive":
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ValueError("expected a boolean")
    if key == "ngram_orders":
        return tuple(int(p) for p in raw.split(",") if p.strip())
    if key == "smoothing":
        return tuple(float(p) for p in raw.split(",") if p.strip())
    return raw


@dataclass(frozen=True)
class ObfuscationResult:
    """Everything the pipeline produced for one document."""

    doc: Document
    source: str
    target: str
    spans_step1: tuple[MaskSpan, ...]
    spans_step2: tuple[MaskSpan, ...]
    spans_step3: tuple[MaskSpan, ...]
    masked_step1: str
    masked_step2: str
    masked_step3: str
    trace: UnmaskTrace | None


def run_pipeline(
    doc: Document,
    table: DomainAffinity,
    model: MultinomialDomainClassifier,
    saliency: SaliencyVector | Mapping[str, SaliencyVector] | None,
    config: PipelineConfig,
    source: str,
    target: str,
) -> ObfuscationResult:
    """Apply the configured steps to one document. ``saliency`` is None to
    compute occlusion scores from ``model``, or a vector / doc_id-keyed
    mapping of externally produced scores."""
    require(source != target, f"source and target are both {source!r}")

    if config.ablation == ABLATION_NO_INIT:
        md = MaskedDocument(doc=doc, spans=(), source_domain=source, target_domain=target)
    else:
        md = mask_step1(doc, table, source, target, config.tau1)
    spans1 = md.spans

    if config.ablation != ABLATION_NO_OTT:
        if saliency is None:
            vector = occlusion_saliency(doc, model, source)
        elif isinstance(saliency, SaliencyVector):
            vector = saliency
        else:
            vector = saliency.get(doc.id)
            if vector is None:
                raise InputError(f"no saliency vector for doc {doc.id!r}")
        md = mask_step2(md, vector, config.tau2_policy)
    spans2 = md.spans

    trace = None
    if config.ablation != ABLATION_NO_UNMASK:
        md, trace = unmask_step3(
            md, model, source, config.tau3, config.unmask_strategy
        )
    spans3 = md.spans

    def _render(spans):
        return render(doc, spans, config.mask_sentinel, config.merge_consecutive)

    return ObfuscationResult(
        doc=doc,
        source=source,
        target=target,
        spans_step1=spans1,
        spans_step2=spans2,
        spans_step3=spans3,
        masked_step1=_render(spans1),
        masked_step2=_render(spans2),
        masked_step3=_render(spans3),
        trace=trace,
    )


class DomainObfuscator(BaseEstimator):
    """Fit the affinity table and domain classifier on a corpus, then
    transform documents of the source domain into masked results."""

    def __init__(
        self,
        source: str,
        target: str,
        config: PipelineConfig | None = None,
    ):
        self.source = source
        self.target = target
        self.config = config

    @property
    def _config(self) -> PipelineConfig:
        return self.config if self.config is not None else PipelineConfig()

    def fit(self, corpus: Corpus, y=None) -> "DomainObfuscator":
        cfg = self._config
        for domain in (self.source, self.target):
            require(
                domain in corpus.domains,
                f"domain {domain!r} not in corpus domains {list(corpus.domains)}",
            )
        self.table_ = DomainAffinity(
            smoothing=cfg.smoothing,
            min_doc_freq=cfg.min_doc_freq,
            orders=cfg.ngram_orders,
        ).fit(corpus)
        self.model_ = MultinomialDomainClassifier(
            smoothing=cfg.clf_smoothing, mask_sentinel=cfg.mask_sentinel
        ).fit(corpus)
        self.external_saliency_: dict[str, SaliencyVector] | None = None
        if cfg.saliency == "external":
            from .saliency import load_external_saliency

            self.external_saliency_ = load_external_saliency(cfg.saliency_file, corpus)
        return self

    def transform(self, docs: Iterable[Document]) -> list[ObfuscationResult]:
        from .validation import check_fitted

        check_fitted(self, "table_")
        cfg = self._config
        return [
            run_pipeline(
                doc,
                self.table_,
                self.model_,
                self.external_saliency_,
                cfg,
                self.source,
                self.target,
            )
            for doc in docs
        ]

    def fit_transform(self, corpus: Corpus, y=None) -> list[ObfuscationResult]:
        self.fit(corpus)
        return self.transform(corpus.by_domain(self.source))


def naive_infill(
    result: ObfuscationResult,
    table: DomainAffinity,
    target: str,
    seed: int = 0,
) -> str:
    """Replace each final masked span with one unigram drawn (seeded) from the
    table's top-20 keys by target-domain affinity. A stand-in for a real
    generator; the masked-output file is the interchange point for one."""
    top = table.top_keys(target, order=1, k=INFILL_TOP_K)
    require(bool(top), f"affinity table has no unigram entries for target {target!r}")
    rng = random.Random(seed)
    tokens = list(result.doc.tokens)
    out: list[str] = []
    covered = {p: span for span in result.spans_step3 for p in span.positions()}
    i = 0
    while i < len(tokens):
        span = covered.get(i)
        if span is not None and span.start == i:
            out.append(rng.choice(top))
            i = span.stop
        else:
            out.append(tokens[i])
            i += 1
    return " ".join(out)


def write_results(
    results: Sequence[ObfuscationResult], path: str | Path
) -> None:
    """Write the masked-output JSONL file."""
    with open(path, "w", encoding="utf-8") as f:
        for r in results:
            f.write(json.dumps(result_record(r), ensure_ascii=False) + "\n")


def result_record(r: ObfuscationResult) -> dict:
    record = {
        "id": r.doc.id,
        "source": r.source,
        "target": r.target,
        "masked_step1": r.masked_step1,
        "masked_step2": r.masked_step2,
        "masked_step3": r.masked_step3,
        "spans": [
            {"start": s.start, "length": s.length, "step": s.step, "score": s.score}
            for s in r.spans_step3
        ],
        "trace": None
        if r.trace is None
        else {
            "candidate_gains": [[p, g] for p, g in r.trace.candidate_gains],
            "restored": list(r.trace.restored),
            "stop_reason": r.trace.stop_reason,
            "final_confidence": r.trace.final_confidence,
        },
    }
    return record


def read_results(path: str | Path) -> list[dict]:
    """Read a masked-output JSONL file back into plain records."""
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}: line {lineno}: invalid JSON ({exc})") from exc
    return records
