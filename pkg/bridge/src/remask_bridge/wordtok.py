"""Word-level tokenization matching the consumer's corpus rule byte-for-byte:
lowercase, word-character runs, punctuation as standalone tokens."""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def word_tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())
