"""Guarded unmasking: restore masked spans while the origin-domain
probability stays below a ceiling.

The gain of a span is the increase in origin-domain probability when it alone
is restored. Candidates are visited in ascending gain order (or the variant
orders below); each restoration is committed only if the resulting probability
is still under the guard, and the first violating candidate is rolled back,
ending the iteration. Spans restore atomically; gain ties break by position.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .classifier import MultinomialDomainClassifier
from .masking import MaskedDocument, MaskSpan
from .validation import ConfigError, InputError, require

DEFAULT_TAU3 = 0.4

STATIC_ASCENDING = "static"
GREEDY_RECOMPUTE = "greedy"
WORD_ORDER = "word-order"
STRATEGIES = (STATIC_ASCENDING, GREEDY_RECOMPUTE, WORD_ORDER)

GUARD_VIOLATION = "guard_violation"
EXHAUSTED = "exhausted"
ALREADY_ABOVE_GUARD = "step2_already_above_guard"


@dataclass(frozen=True)
class UnmaskTrace:
    """Audit record of one unmasking run."""

    candidate_gains: tuple[tuple[int, float], ...]
    restored: tuple[int, ...]
    stop_reason: str
    final_confidence: float


def _confidence(md: MaskedDocument, model: MultinomialDomainClassifier, source: str) -> float:
    return model.proba(md.visible_tokens(), source)


def unmask_gain(
    md: MaskedDocument,
    model: MultinomialDomainClassifier,
    source: str,
    position: int,
) -> float:
    """Origin-domain probability gain from restoring the span covering
    ``position``. Raises if the position is not masked."""
    span = next((s for s in md.spans if position in s.positions()), None)
    if span is None:
        raise InputError(f"position {position} of doc {md.doc.id!r} is not masked")
    base = _confidence(md, model, source)
    restored = md.with_spans(s for s in md.spans if s != span)
    return _confidence(restored, model, source) - base


def _gains(
    md: MaskedDocument,
    model: MultinomialDomainClassifier,
    source: str,
    base: float,
) -> list[tuple[MaskSpan, float, float]]:
    """(span, gain, confidence-if-restored) for every span of ``md``."""
    out = []
    for span in md.spans:
        restored = md.with_spans(s for s in md.spans if s != span)
        conf = _confidence(restored, model, source)
        out.append((span, conf - base, conf))
    return out


def unmask_step3(
    md: MaskedDocument,
    model: MultinomialDomainClassifier,
    source: str,
    tau3: float = DEFAULT_TAU3,
    strategy: str = STATIC_ASCENDING,
) -> tuple[MaskedDocument, UnmaskTrace]:
    """Restore spans of ``md`` per ``strategy`` under the guard ``tau3``.

    static: gains computed once on the input, restored in ascending order.
    greedy: remaining gains recomputed after every restoration.
    word-order: restored left to right regardless of gain.
    """
    if not 0.0 < tau3 < 1.0:
        raise ConfigError(f"tau3 must lie in (0, 1), got {tau3}")
    require(strategy in STRATEGIES, f"unknown strategy {strategy!r}; choose from {STRATEGIES}",
            ConfigError)

    confidence = _confidence(md, model, source)
    input_confidence = confidence
    initial_gains = _gains(md, model, source, confidence)
    if strategy == WORD_ORDER:
        initial_gains.sort(key=lambda sg: sg[0].start)
    else:
        initial_gains.sort(key=lambda sg: (sg[1], sg[0].start))
    trace_gains = tuple((span.start, gain) for span, gain, _ in initial_gains)

    current = md
    restored: list[int] = []
    stop_reason = EXHAUSTED

    if strategy == GREEDY_RECOMPUTE:
        while current.spans:
            gains = _gains(current, model, source, confidence)
            span, _, new_confidence = min(gains, key=lambda sg: (sg[1], sg[0].start))
            if new_confidence >= tau3:
                stop_reason = GUARD_VIOLATION
                break
            current = current.with_spans(s for s in current.spans if s != span)
            confidence = new_confidence
            restored.append(span.start)
    else:
        for span, _, _ in initial_gains:
            candidate = current.with_spans(s for s in current.spans if s != span)
            new_confidence = _confidence(candidate, model, source)
            if new_confidence >= tau3:
                stop_reason = GUARD_VIOLATION
                break
            current = candidate
            confidence = new_confidence
            restored.append(span.start)

    if stop_reason == GUARD_VIOLATION and not restored and input_confidence >= tau3:
        stop_reason = ALREADY_ABOVE_GUARD

    trace = UnmaskTrace(
        candidate_gains=trace_gains,
        restored=tuple(restored),
        stop_reason=stop_reason,
        final_confidence=confidence,
    )
    return current, trace
