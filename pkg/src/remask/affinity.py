"""Domain-affinity statistics over stemmed n-grams and threshold masking.

For an n-gram key w and domain D, the table holds document-level counts
c(w, D), the smoothed conditional P(D|w) = (c(w,D) + a_n) / (sum_d c(w,d) + a_n*N),
and the affinity rho(w, D) = P(D|w) * (1 - H(D|w)/ln N). The transfer score
for a source/target pair is m_a = rho(w, source) - rho(w, target); keys above
a threshold are masked, unigrams first, then non-overlapping bigrams and
trigrams.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from sklearn.base import BaseEstimator

from .corpus import Corpus, Document, extract_ngrams
from .masking import STEP1, MaskedDocument, MaskSpan
from .validation import InputError, check_domain, check_fitted, require

DEFAULT_SMOOTHING = (1.0, 5.0, 7.0)
DEFAULT_MIN_DOC_FREQ = 10
DEFAULT_TAU1 = 0.08


@dataclass(frozen=True)
class AffinityEntry:
    order: int
    counts: tuple[int, ...]
    probs: tuple[float, ...]
    rho: tuple[float, ...]


def _rho_row(counts: Sequence[int], alpha: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Smoothed P(D|w) and rho(w, D) for one key's per-domain counts."""
    n_domains = len(counts)
    total = sum(counts)
    denom = total + alpha * n_domains
    probs = tuple((c + alpha) / denom for c in counts)
    if len(set(counts)) == 1:
        # exactly uniform: the entropy attains ln N, so the deficit is 0
        return probs, (0.0,) * n_domains
    entropy = -sum(p * math.log(p) for p in probs if p > 0.0)
    deficit = 1.0 - entropy / math.log(n_domains)
    deficit = min(1.0, max(0.0, deficit))
    return probs, tuple(p * deficit for p in probs)


class DomainAffinity(BaseEstimator):
    """N-gram affinity table for a multi-domain corpus.

    Parameters
    ----------
    smoothing : additive smoothing constants per n-gram order (n = 1, 2, 3).
    min_doc_freq : keys kept only if they occur in at least this many documents.
    orders : n-gram orders to collect, a subset of (1, 2, 3).
    """

    def __init__(
        self,
        smoothing: Sequence[float] = DEFAULT_SMOOTHING,
        min_doc_freq: int = DEFAULT_MIN_DOC_FREQ,
        orders: Sequence[int] = (1, 2, 3),
    ):
        self.smoothing = smoothing
        self.min_doc_freq = min_doc_freq
        self.orders = orders

    def fit(self, corpus: Corpus, y=None) -> "DomainAffinity":
        require(
            len(corpus.domains) >= 2,
            f"affinity statistics need at least 2 domains, got {list(corpus.domains)}",
        )
        orders = tuple(sorted(set(self.orders)))
        require(
            orders and all(n in (1, 2, 3) for n in orders),
            f"orders must be a non-empty subset of (1, 2, 3), got {self.orders}",
        )
        alphas = tuple(float(a) for a in self.smoothing)
        require(len(alphas) == 3, "smoothing must give one constant per order (1, 2, 3)")
        require(all(a >= 0 for a in alphas), f"negative smoothing {alphas}")
        require(self.min_doc_freq >= 0, f"negative min_doc_freq {self.min_doc_freq}")

        domains = corpus.domains
        index = {d: i for i, d in enumerate(domains)}
        counts: dict[str, list[int]] = {}
        key_order: dict[str, int] = {}
        for doc in corpus:
            di = index[doc.domain]
            seen = {key for _, _, key in extract_ngrams(doc, orders)}
            for key in seen:
                row = counts.get(key)
                if row is None:
                    row = counts[key] = [0] * len(domains)
                    key_order[key] = key.count(" ") + 1
                row[di] += 1

        entries: dict[str, AffinityEntry] = {}
        for key, row in counts.items():
            if sum(row) < self.min_doc_freq:
                continue
            n = key_order[key]
            probs, rho = _rho_row(row, alphas[n - 1])
            entries[key] = AffinityEntry(order=n, counts=tuple(row), probs=probs, rho=rho)

        self.domains_ = domains
        self.entries_ = entries
        self.n_documents_ = len(corpus)
        return self

    def _domain_index(self, domain: str) -> int:
        check_fitted(self, "entries_")
        check_domain(domain, self.domains_, "affinity table")
        return self.domains_.index(domain)

    def rho(self, key: str, domain: str) -> float:
        """Affinity of a key with a domain; 0 for keys not in the table."""
        i = self._domain_index(domain)
        entry = self.entries_.get(key)
        return entry.rho[i] if entry is not None else 0.0

    def transfer_score(self, key: str, source: str, target: str) -> float:
        """m_a = rho(key, source) - rho(key, target); 0 for absent keys."""
        si = self._domain_index(source)
        ti = self._domain_index(target)
        require(source != target, f"source and target are both {source!r}")
        entry = self.entries_.get(key)
        if entry is None:
            return 0.0
        return entry.rho[si] - entry.rho[ti]

    def top_keys(self, domain: str, order: int = 1, k: int = 20) -> list[str]:
        """The k keys of the given order with the highest rho for ``domain``."""
        i = self._domain_index(domain)
        pool = [(key, e.rho[i]) for key, e in self.entries_.items() if e.order == order]
        pool.sort(key=lambda kv: (-kv[1], kv[0]))
        return [key for key, _ in pool[:k]]

    def save(self, path: str | Path) -> None:
        check_fitted(self, "entries_")
        payload = {
            "domains": list(self.domains_),
            "smoothing": [float(a) for a in self.smoothing],
            "min_doc_freq": self.min_doc_freq,
            "orders": sorted(set(self.orders)),
            "n_documents": self.n_documents_,
            "entries": {
                key: {"counts": list(e.counts), "rho": list(e.rho)}
                for key, e in sorted(self.entries_.items())
            },
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, ensure_ascii=False)

    @classmethod
    def load(cls, path: str | Path) -> "DomainAffinity":
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
        try:
            table = cls(
                smoothing=tuple(payload["smoothing"]),
                min_doc_freq=payload["min_doc_freq"],
                orders=tuple(payload["orders"]),
            )
            domains = tuple(payload["domains"])
            alphas = tuple(float(a) for a in payload["smoothing"])
            entries = {}
            for key, rec in payload["entries"].items():
                n = key.count(" ") + 1
                row = [int(c) for c in rec["counts"]]
                require(len(row) == len(domains), f"entry {key!r} has {len(row)} counts")
                probs, rho = _rho_row(row, alphas[n - 1])
                entries[key] = AffinityEntry(n, tuple(row), probs, rho)
        except KeyError as exc:
            raise InputError(f"{path}: missing field {exc} in affinity table") from exc
        table.domains_ = domains
        table.entries_ = entries
        table.n_documents_ = payload.get("n_documents", 0)
        return table


def build_table(
    corpus: Corpus,
    smoothing: Sequence[float] = DEFAULT_SMOOTHING,
    min_doc_freq: int = DEFAULT_MIN_DOC_FREQ,
    orders: Sequence[int] = (1, 2, 3),
) -> DomainAffinity:
    return DomainAffinity(smoothing=smoothing, min_doc_freq=min_doc_freq, orders=orders).fit(corpus)


def mask_step1(
    doc: Document,
    table: DomainAffinity,
    source: str,
    target: str,
    tau1: float = DEFAULT_TAU1,
) -> MaskedDocument:
    """Mask every n-gram whose transfer score exceeds ``tau1``, scanning
    unigrams, then bigrams and trigrams that do not overlap earlier masks.
    Comparison is strict: ties at the threshold stay unmasked."""
    require(tau1 > 0, f"tau1 must be positive, got {tau1}", InputError)
    si = table._domain_index(source)
    ti = table._domain_index(target)
    require(source != target, f"source and target are both {source!r}")

    entries = table.entries_
    spans: list[MaskSpan] = []
    hidden: set[int] = set()
    for n in sorted(set(table.orders)):
        for pos in range(len(doc) - n + 1):
            if any(p in hidden for p in range(pos, pos + n)):
                continue
            entry = entries.get(" ".join(doc.stems[pos : pos + n]))
            if entry is None:
                continue
            score = entry.rho[si] - entry.rho[ti]
            if score > tau1:
                spans.append(MaskSpan(pos, n, STEP1, score))
                hidden.update(range(pos, pos + n))
    return MaskedDocument(doc=doc, spans=tuple(spans), source_domain=source, target_domain=target)
