"""Shared fixtures: toy oracle corpus, random corpus generator and the
planted-token synthetic corpus used by the evaluation tests."""

from __future__ import annotations

import random

import pytest

from remask.classifier import MultinomialDomainClassifier
from remask.corpus import Corpus, Document


def make_doc(doc_id: str, domain: str, text: str, max_tokens: int = 96) -> Document:
    return Document.from_text(doc_id, domain, text, max_tokens=max_tokens)


@pytest.fixture(scope="session")
def toy_corpus() -> Corpus:
    """Two domains, closed-form likelihoods: P(a|D1)=3/5, P(b|D1)=2/5,
    P(a|D2)=1/4, P(b|D2)=3/4 under smoothing 1."""
    return Corpus(
        documents=(
            make_doc("t1", "D1", "a a b"),
            make_doc("t2", "D2", "b b"),
        )
    )


@pytest.fixture(scope="session")
def toy_model(toy_corpus) -> MultinomialDomainClassifier:
    return MultinomialDomainClassifier(smoothing=1.0).fit(toy_corpus)


def random_corpus(rng: random.Random, n_domains=None, n_docs=None) -> Corpus:
    """A small random corpus with some domain-skewed vocabulary so masking
    statistics are non-trivial."""
    n_domains = n_domains or rng.randint(2, 4)
    domains = [f"dom{i}" for i in range(n_domains)]
    shared = [f"w{i}" for i in range(rng.randint(5, 15))]
    exclusive = {d: [f"x{d}{i}" for i in range(rng.randint(1, 4))] for d in domains}
    n_docs = n_docs or rng.randint(2 * n_domains, 30)
    docs = []
    for i in range(n_docs):
        domain = domains[i % n_domains]
        length = rng.randint(1, 25)
        tokens = []
        for _ in range(length):
            if rng.random() < 0.3:
                tokens.append(rng.choice(exclusive[domain]))
            else:
                tokens.append(rng.choice(shared))
        docs.append(make_doc(f"doc{i}", domain, " ".join(tokens)))
    return Corpus(documents=tuple(docs))


def planted_corpus(
    seed: int,
    n_docs: int = 2000,
    n_domains: int = 3,
    planted_per_domain: int = 30,
    n_common: int = 15,
    n_background: int = 60,
    background_len: int = 15,
    rare_docs_per_type: int = 9,
) -> Corpus:
    """Synthetic corpus with planted domain-exclusive tokens over a shared
    background vocabulary. Per domain, ``n_common`` planted types occur often
    enough to enter the affinity table while the rest stay under the default
    document-frequency floor and are only reachable through saliency."""
    rng = random.Random(seed)
    domains = [f"d{i}" for i in range(n_domains)]
    background = [f"bg{i:02d}" for i in range(n_background)]
    common = {d: [f"pc{d}x{i:02d}" for i in range(n_common)] for d in domains}
    rare = {
        d: [f"pr{d}x{i:02d}" for i in range(planted_per_domain - n_common)]
        for d in domains
    }

    docs = []
    per_domain = n_docs // n_domains
    extra = n_docs - per_domain * n_domains
    doc_index = 0
    for di, d in enumerate(domains):
        count = per_domain + (1 if di < extra else 0)
        for j in range(count):
            # round-robin background keeps per-domain counts balanced, so the
            # shared vocabulary carries (almost) no domain signal
            base = doc_index * 7
            tokens = [background[(base + i) % n_background] for i in range(background_len)]
            for _ in range(2):
                tokens.insert(rng.randrange(len(tokens) + 1), rng.choice(common[d]))
            # one copy only: occlusion sees the full probability drop
            rare_type = j // rare_docs_per_type
            if rare_type < len(rare[d]):
                tokens.insert(rng.randrange(len(tokens) + 1), rare[d][rare_type])
            docs.append(make_doc(f"{d}-{j:04d}", d, " ".join(tokens)))
            doc_index += 1
    return Corpus(documents=tuple(docs))


@pytest.fixture(scope="session")
def small_planted_corpus() -> Corpus:
    return planted_corpus(seed=7, n_docs=300, background_len=12, rare_docs_per_type=4)
