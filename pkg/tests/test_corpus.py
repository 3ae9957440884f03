"""Tokenization, corpus loading and n-gram extraction."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from remask.corpus import (
    Corpus,
    Document,
    detokenize,
    extract_ngrams,
    load_corpus,
    tokenize,
)
from remask.validation import InputError

from conftest import make_doc


class TestTokenize:
    def test_empty(self):
        assert tokenize("") == []

    def test_punctuation_standalone(self):
        assert tokenize("Very satisfying!") == ["very", "satisfying", "!"]

    def test_alphanumeric_kept_whole(self):
        assert tokenize("sony rm - ax4000") == ["sony", "rm", "-", "ax4000"]

    def test_lowercases(self):
        assert tokenize("DVD Player") == ["dvd", "player"]

    def test_splits_attached_punctuation(self):
        assert tokenize("don't stop.") == ["don", "'", "t", "stop", "."]

    def test_no_empty_tokens(self):
        assert all(tokenize("  a  ,,  b  "))

    @given(st.text(max_size=200))
    def test_round_trip(self, text):
        tokens = tokenize(text)
        assert tokenize(detokenize(tokens)) == tokens


class TestDocument:
    def test_parallel_stems(self):
        doc = make_doc("d", "x", "running dogs")
        assert doc.tokens == ("running", "dogs")
        assert doc.stems == ("run", "dog")

    def test_truncation_keeps_first(self):
        text = " ".join(f"w{i}" for i in range(120))
        doc = make_doc("d", "x", text, max_tokens=96)
        assert len(doc.tokens) == 96
        assert doc.tokens[0] == "w0"
        assert doc.tokens[-1] == "w95"

    def test_length_mismatch_rejected(self):
        with pytest.raises(InputError):
            Document(id="d", domain="x", tokens=("a", "b"), stems=("a",))


class TestCorpus:
    def test_domains_first_seen_order(self):
        corpus = Corpus(
            documents=(
                make_doc("1", "kitchen", "pan"),
                make_doc("2", "dvd", "film"),
                make_doc("3", "kitchen", "oven"),
            )
        )
        assert corpus.domains == ("kitchen", "dvd")

    def test_unknown_domain_rejected_with_explicit_domains(self):
        with pytest.raises(InputError):
            Corpus(documents=(make_doc("1", "dvd", "x"),), domains=("book",))


class TestLoadCorpus:
    def write(self, tmp_path, lines):
        path = tmp_path / "corpus.jsonl"
        path.write_text("\n".join(lines), encoding="utf-8")
        return path

    def test_empty_file(self, tmp_path):
        corpus = load_corpus(self.write(tmp_path, []))
        assert len(corpus) == 0

    def test_two_domains(self, tmp_path):
        lines = [
            json.dumps({"id": "1", "domain": "dvd", "text": "great movie"}),
            json.dumps({"id": "2", "domain": "kitchen", "text": "great pan", "label": "pos"}),
        ]
        corpus = load_corpus(self.write(tmp_path, lines))
        assert corpus.domains == ("dvd", "kitchen")
        assert corpus.documents[1].task_label == "pos"

    def test_truncates_to_max_tokens(self, tmp_path):
        text = " ".join(f"w{i}" for i in range(120))
        lines = [json.dumps({"id": "1", "domain": "a", "text": text})]
        corpus = load_corpus(self.write(tmp_path, lines), max_tokens=96)
        assert len(corpus.documents[0].tokens) == 96

    def test_malformed_line_names_lineno(self, tmp_path):
        lines = [json.dumps({"id": "1", "domain": "a", "text": "x"}), "{not json"]
        with pytest.raises(InputError, match="line 2"):
            load_corpus(self.write(tmp_path, lines))

    def test_missing_field_names_lineno(self, tmp_path):
        lines = [json.dumps({"id": "1", "text": "x"})]
        with pytest.raises(InputError, match="line 1"):
            load_corpus(self.write(tmp_path, lines))

    def test_empty_domain_rejected(self, tmp_path):
        lines = [json.dumps({"id": "1", "domain": "", "text": "x"})]
        with pytest.raises(InputError):
            load_corpus(self.write(tmp_path, lines))


class TestExtractNgrams:
    def test_single_token(self):
        doc = make_doc("d", "x", "hello")
        assert extract_ngrams(doc, [1, 2, 3]) == [(0, 1, "hello")]

    def test_bigram_positions(self):
        doc = make_doc("d", "x", "a b c")
        assert extract_ngrams(doc, [2]) == [(0, 2, "a b"), (1, 2, "b c")]

    def test_counting_identity(self):
        doc = make_doc("d", "x", " ".join(f"w{i}" for i in range(7)))
        k = 7
        assert len(extract_ngrams(doc, [1, 2, 3])) == k + (k - 1) + (k - 2)

    def test_keys_are_stems(self):
        doc = make_doc("d", "x", "running dogs")
        assert extract_ngrams(doc, [2]) == [(0, 2, "run dog")]

    def test_positions_within_bounds(self):
        doc = make_doc("d", "x", " ".join(f"w{i}" for i in range(10)))
        for pos, n, _ in extract_ngrams(doc, [1, 2, 3]):
            assert 0 <= pos <= len(doc.tokens) - n

    def test_bad_order_rejected(self):
        with pytest.raises(InputError):
            extract_ngrams(make_doc("d", "x", "a b"), [4])
