"""Corpus ingestion: tokenization, stemming, truncation and n-gram extraction.

Corpus files are UTF-8 JSON lines, one record per line, with string fields
``id``, ``domain``, ``text`` and an optional ``label``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .stemming import stem
from .validation import InputError, require

DEFAULT_MAX_TOKENS = 96

# word-character runs, or single punctuation characters
_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation; punctuation marks
    become standalone tokens. Empty input gives an empty list."""
    return _TOKEN_RE.findall(text.lower())


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


@dataclass(frozen=True)
class Document:
    """One tokenized record. ``stems`` runs parallel to ``tokens``."""

    id: str
    domain: str
    tokens: tuple[str, ...]
    stems: tuple[str, ...]
    task_label: str | None = None

    def __post_init__(self):
        require(
            len(self.tokens) == len(self.stems),
            f"document {self.id!r}: {len(self.tokens)} tokens vs {len(self.stems)} stems",
        )

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_text(
        cls,
        id: str,
        domain: str,
        text: str,
        max_tokens: int = DEFAULT_MAX_TOKENS,
        task_label: str | None = None,
    ) -> "Document":
        tokens = tuple(tokenize(text)[:max_tokens])
        return cls(
            id=id,
            domain=domain,
            tokens=tokens,
            stems=tuple(stem(t) for t in tokens),
            task_label=task_label,
        )


@dataclass(frozen=True)
class Corpus:
    """Immutable document collection; ``domains`` keeps first-seen order."""

    documents: tuple[Document, ...]
    domains: tuple[str, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.domains is None:
            seen: dict[str, None] = {}
            for doc in self.documents:
                seen.setdefault(doc.domain, None)
            object.__setattr__(self, "domains", tuple(seen))
        else:
            object.__setattr__(self, "domains", tuple(self.domains))
            known = set(self.domains)
            for doc in self.documents:
                require(
                    doc.domain in known,
                    f"document {doc.id!r} has domain {doc.domain!r} outside {self.domains}",
                )

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def by_domain(self, domain: str) -> list[Document]:
        return [d for d in self.documents if d.domain == domain]


def load_corpus(path: str | Path, max_tokens: int = DEFAULT_MAX_TOKENS) -> Corpus:
    """Read a JSONL corpus file; errors name the offending line number."""
    docs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}: line {lineno}: invalid JSON ({exc})") from exc
            if not isinstance(record, dict):
                raise InputError(f"{path}: line {lineno}: record is not an object")
            missing = {"id", "domain", "text"} - record.keys()
            if missing:
                raise InputError(
                    f"{path}: line {lineno}: missing field(s) {sorted(missing)}"
                )
            domain = record["domain"]
            if not isinstance(domain, str) or not domain:
                raise InputError(f"{path}: line {lineno}: empty or non-string domain")
            docs.append(
                Document.from_text(
                    id=str(record["id"]),
                    domain=domain,
                    text=str(record["text"]),
                    max_tokens=max_tokens,
                    task_label=record.get("label"),
                )
            )
    return Corpus(documents=tuple(docs))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for doc in corpus:
            record = {"id": doc.id, "domain": doc.domain, "text": detokenize(doc.tokens)}
            if doc.task_label is not None:
                record["label"] = doc.task_label
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


def extract_ngrams(
    doc: Document, orders: Iterable[int] = (1, 2, 3)
) -> list[tuple[int, int, str]]:
    """All (position, n, stemmed key) entries of the document, keys being
    space-joined stems of n consecutive tokens."""
    orders = sorted(set(orders))
    require(all(n in (1, 2, 3) for n in orders), f"n-gram orders must be in 1..3, got {orders}")
    out = []
    k = len(doc.stems)
    for n in orders:
        for pos in range(k - n + 1):
            out.append((pos, n, " ".join(doc.stems[pos : pos + n])))
    return out
