"""Mask spans over documents and their text rendering."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .corpus import Document
from .validation import InputError, require

MASK_SENTINEL = "<m>"

STEP1 = "step1"
STEP2 = "step2"


@dataclass(frozen=True, order=True)
class MaskSpan:
    """A masked run of 1-3 tokens, tagged with the step that created it and
    the score (transfer score or saliency) that triggered it."""

    start: int
    length: int
    step: str
    score: float

    def __post_init__(self):
        require(1 <= self.length <= 3, f"span length {self.length} outside 1..3")
        require(self.start >= 0, f"negative span start {self.start}")

    @property
    def stop(self) -> int:
        return self.start + self.length

    def positions(self) -> range:
        return range(self.start, self.stop)

    def overlaps(self, other: "MaskSpan") -> bool:
        return self.start < other.stop and other.start < self.stop


@dataclass(frozen=True)
class MaskedDocument:
    """A document plus non-overlapping mask spans for one domain transfer."""

    doc: Document
    spans: tuple[MaskSpan, ...]
    source_domain: str
    target_domain: str

    def __post_init__(self):
        spans = tuple(sorted(self.spans))
        object.__setattr__(self, "spans", spans)
        for a, b in zip(spans, spans[1:]):
            require(not a.overlaps(b), f"overlapping spans {a} and {b}")
        if spans:
            require(
                spans[-1].stop <= len(self.doc),
                f"span {spans[-1]} exceeds document length {len(self.doc)}",
            )

    def masked_positions(self) -> set[int]:
        return {p for s in self.spans for p in s.positions()}

    def visible_tokens(self) -> list[str]:
        """Tokens not covered by any span, in document order."""
        hidden = self.masked_positions()
        return [t for i, t in enumerate(self.doc.tokens) if i not in hidden]

    def with_spans(self, spans: Iterable[MaskSpan]) -> "MaskedDocument":
        return replace(self, spans=tuple(spans))

    def add_spans(self, new: Iterable[MaskSpan]) -> "MaskedDocument":
        return self.with_spans(self.spans + tuple(new))


def render(
    doc: Document,
    spans: Sequence[MaskSpan],
    mask_sentinel: str = MASK_SENTINEL,
    merge_consecutive: bool = False,
) -> str:
    """Render the masked text: one sentinel per masked token position,
    everything else verbatim, single-space joined. With ``merge_consecutive``
    a run of adjacent sentinels collapses into one."""
    hidden = {p for s in spans for p in s.positions()}
    out: list[str] = []
    for i, token in enumerate(doc.tokens):
        if i in hidden:
            if merge_consecutive and out and out[-1] == mask_sentinel and (i - 1) in hidden:
                continue
            out.append(mask_sentinel)
        else:
            out.append(token)
    return " ".join(out)


def recover_masked_positions(
    rendered: str, tokens: Sequence[str], mask_sentinel: str = MASK_SENTINEL
) -> set[int]:
    """Invert :func:`render` (merge off): the set of masked token positions."""
    parts = rendered.split(" ") if rendered else []
    if len(parts) != len(tokens):
        raise InputError(
            f"rendered text has {len(parts)} tokens, document has {len(tokens)}"
        )
    positions = set()
    for i, (part, token) in enumerate(zip(parts, tokens)):
        if part == mask_sentinel:
            positions.add(i)
        elif part != token:
            raise InputError(f"token {i} mismatch: {part!r} vs {token!r}")
    return positions
