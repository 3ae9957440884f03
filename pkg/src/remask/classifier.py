"""Multinomial bag-of-words domain classifier.

Supplies the origin-domain probability used by occlusion saliency, the
unmasking guard and leakage evaluation. Mask sentinels and out-of-vocabulary
tokens contribute nothing, so masking strictly removes evidence. Likelihoods
are accumulated per distinct token in sorted order, which makes the posterior
exactly invariant under token permutations.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from pathlib import Path
from typing import Sequence

from sklearn.base import BaseEstimator

from .corpus import Corpus
from .masking import MASK_SENTINEL
from .validation import InputError, check_fitted, require

DEFAULT_LIKELIHOOD_SMOOTHING = 1.0


class MultinomialDomainClassifier(BaseEstimator):
    """Additively-smoothed multinomial model over surface tokens.

    Priors come from per-domain document frequencies; token likelihoods from
    per-domain token counts. Scoring runs in log space with max-subtraction
    before exponentiation.
    """

    def __init__(
        self,
        smoothing: float = DEFAULT_LIKELIHOOD_SMOOTHING,
        mask_sentinel: str = MASK_SENTINEL,
    ):
        self.smoothing = smoothing
        self.mask_sentinel = mask_sentinel

    def fit(self, corpus: Corpus, y=None) -> "MultinomialDomainClassifier":
        require(
            len(corpus.domains) >= 2,
            f"domain classifier needs at least 2 domains, got {list(corpus.domains)}",
        )
        require(self.smoothing > 0, f"smoothing must be positive, got {self.smoothing}")
        domains = corpus.domains
        doc_counts = Counter(doc.domain for doc in corpus)
        for d in domains:
            require(doc_counts[d] > 0, f"domain {d!r} has no documents")

        token_counts: dict[str, Counter] = {d: Counter() for d in domains}
        vocabulary: set[str] = set()
        for doc in corpus:
            c = token_counts[doc.domain]
            for t in doc.tokens:
                if t == self.mask_sentinel:
                    continue
                c[t] += 1
                vocabulary.add(t)

        s = float(self.smoothing)
        vsize = len(vocabulary)
        totals = {d: sum(token_counts[d].values()) for d in domains}
        loglik: dict[str, tuple[float, ...]] = {}
        for t in sorted(vocabulary):
            loglik[t] = tuple(
                math.log((token_counts[d][t] + s) / (totals[d] + s * vsize))
                for d in domains
            )

        n_docs = len(corpus)
        self.domains_ = domains
        self.priors_ = tuple(doc_counts[d] / n_docs for d in domains)
        self.log_priors_ = tuple(math.log(p) for p in self.priors_)
        self.loglik_ = loglik
        self.vocabulary_ = frozenset(vocabulary)
        return self

    def _log_scores(self, tokens: Sequence[str]) -> list[float]:
        scores = list(self.log_priors_)
        counts = Counter(
            t for t in tokens if t != self.mask_sentinel and t in self.loglik_
        )
        for t in sorted(counts):
            c = counts[t]
            row = self.loglik_[t]
            for i in range(len(scores)):
                scores[i] += c * row[i]
        return scores

    def predict_proba(self, tokens: Sequence[str]) -> dict[str, float]:
        """Posterior over domains for a bag of tokens; sums to 1. Unknown
        tokens and mask sentinels are skipped; an empty bag gives the priors."""
        check_fitted(self, "loglik_")
        scores = self._log_scores(tokens)
        peak = max(scores)
        weights = [math.exp(s - peak) for s in scores]
        total = sum(weights)
        return {d: w / total for d, w in zip(self.domains_, weights)}

    def proba(self, tokens: Sequence[str], domain: str) -> float:
        """Posterior probability of one domain."""
        probs = self.predict_proba(tokens)
        if domain not in probs:
            raise InputError(f"unknown domain {domain!r}; known: {list(self.domains_)}")
        return probs[domain]

    def predict(self, tokens: Sequence[str]) -> str:
        """Most probable domain; ties resolve to the earliest domain."""
        probs = self.predict_proba(tokens)
        return max(self.domains_, key=lambda d: (probs[d], -self.domains_.index(d)))

    def save(self, path: str | Path) -> None:
        check_fitted(self, "loglik_")
        payload = {
            "domains": list(self.domains_),
            "priors": list(self.priors_),
            "smoothing": float(self.smoothing),
            "mask_sentinel": self.mask_sentinel,
            "loglik": {t: list(row) for t, row in sorted(self.loglik_.items())},
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, ensure_ascii=False)

    @classmethod
    def load(cls, path: str | Path) -> "MultinomialDomainClassifier":
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
        try:
            model = cls(
                smoothing=payload["smoothing"],
                mask_sentinel=payload["mask_sentinel"],
            )
            model.domains_ = tuple(payload["domains"])
            model.priors_ = tuple(float(p) for p in payload["priors"])
            model.loglik_ = {t: tuple(row) for t, row in payload["loglik"].items()}
        except KeyError as exc:
            raise InputError(f"{path}: missing field {exc} in classifier model") from exc
        model.log_priors_ = tuple(math.log(p) for p in model.priors_)
        model.vocabulary_ = frozenset(model.loglik_)
        return model


def train(
    corpus: Corpus,
    smoothing: float = DEFAULT_LIKELIHOOD_SMOOTHING,
    mask_sentinel: str = MASK_SENTINEL,
) -> MultinomialDomainClassifier:
    return MultinomialDomainClassifier(smoothing=smoothing, mask_sentinel=mask_sentinel).fit(corpus)
