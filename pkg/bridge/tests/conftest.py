"""Shared checkpoint fixture: one tiny separable corpus, fine-tuned once."""

import json
import random

import pytest

from remask_bridge import fine_tune

KITCHEN = ["pan", "oven", "dishwasher", "whisk", "kettle", "spatula"]
DVD = ["film", "actor", "plot", "scene", "director", "sequel"]
SHARED = ["the", "was", "great", "and", "very", "good", "a", "it"]


def write_corpus(path, n_docs=120, seed=0, holdout=0):
    """Separable two-domain corpus; returns (train_path, heldout_records)."""
    rng = random.Random(seed)
    records = []
    for i in range(n_docs + holdout):
        domain, vocab = ("kitchen", KITCHEN) if i % 2 == 0 else ("dvd", DVD)
        words = [rng.choice(SHARED) for _ in range(8)]
        for _ in range(3):
            words.insert(rng.randrange(len(words) + 1), rng.choice(vocab))
        records.append({"id": f"{domain}-{i}", "domain": domain, "text": " ".join(words)})
    held_out = records[n_docs:]
    with open(path, "w", encoding="utf-8") as f:
        for rec in records[:n_docs]:
            f.write(json.dumps(rec) + "\n")
    return path, held_out


@pytest.fixture(scope="session")
def corpus_and_holdout(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "corpus.jsonl"
    return write_corpus(path, n_docs=120, seed=0, holdout=40)


@pytest.fixture(scope="session")
def checkpoint(corpus_and_holdout, tmp_path_factory):
    corpus_path, _ = corpus_and_holdout
    out = tmp_path_factory.mktemp("ckpt") / "model"
    return fine_tune(corpus_path, out, epochs=4, seed=0, hidden_size=64, vocab_size=400)
