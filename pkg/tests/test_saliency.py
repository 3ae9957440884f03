"""Occlusion scores, external vector loading and over-the-top masking."""

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from remask.classifier import train
from remask.corpus import Corpus
from remask.masking import MaskedDocument, MaskSpan
from remask.saliency import (
    SaliencyVector,
    ThresholdPolicy,
    load_external_saliency,
    mask_step2,
    occlusion_saliency,
    save_saliency,
)
from remask.validation import ConfigError, InputError

from conftest import make_doc, random_corpus


class TestOcclusion:
    def test_two_token_oracle(self, toy_model):
        doc = make_doc("x", "D1", "a b")
        sal = occlusion_saliency(doc, toy_model, "D1")
        base = toy_model.proba(["a", "b"], "D1")
        assert sal.scores[0] == base - toy_model.proba(["b"], "D1")
        assert sal.scores[1] == base - toy_model.proba(["a"], "D1")
        assert sal.scores[0] == pytest.approx(0.2136, abs=1e-4)
        assert sal.scores[1] == pytest.approx(-0.1445, abs=1e-4)

    def test_single_token_is_proba_minus_prior(self, toy_model):
        doc = make_doc("x", "D1", "a")
        sal = occlusion_saliency(doc, toy_model, "D1")
        assert sal.scores[0] == toy_model.proba(["a"], "D1") - 0.5

    def test_oov_token_scores_exactly_zero(self, toy_model):
        doc = make_doc("x", "D1", "a unknownword b")
        sal = occlusion_saliency(doc, toy_model, "D1")
        assert sal.scores[1] == 0.0

    def test_duplicate_positions_equal_scores(self, toy_model):
        doc = make_doc("x", "D1", "a b a b a")
        sal = occlusion_saliency(doc, toy_model, "D1")
        assert sal.scores[0] == sal.scores[2] == sal.scores[4]
        assert sal.scores[1] == sal.scores[3]

    def test_matches_bruteforce_removal(self):
        corpus = random_corpus(random.Random(23))
        model = train(corpus)
        source = corpus.domains[0]
        for doc in corpus.documents[:5]:
            sal = occlusion_saliency(doc, model, source)
            base = model.proba(list(doc.tokens), source)
            for i in range(len(doc.tokens)):
                reduced = list(doc.tokens)
                del reduced[i]
                assert sal.scores[i] == base - model.proba(reduced, source)

    def test_planted_token_attains_max_saliency(self):
        docs = []
        for i in range(10):
            docs.append(make_doc(f"a{i}", "D1", f"w0 w1 planted w2 w{i % 3}"))
            docs.append(make_doc(f"b{i}", "D2", f"w0 w1 w2 w3 w{i % 3}"))
        corpus = Corpus(documents=tuple(docs))
        model = train(corpus)
        doc = corpus.documents[0]
        sal = occlusion_saliency(doc, model, "D1")
        assert max(sal.scores) == sal.scores[doc.tokens.index("planted")]

    def test_provider_tag(self, toy_model):
        sal = occlusion_saliency(make_doc("x", "D1", "a"), toy_model, "D1")
        assert sal.provider == "occlusion"


class TestThresholdPolicy:
    def test_absolute(self):
        assert ThresholdPolicy.absolute(0.15).resolve([0.0, 1.0]) == 0.15

    def test_quantile_bounds(self):
        with pytest.raises(ConfigError):
            ThresholdPolicy.quantile(0.0)
        with pytest.raises(ConfigError):
            ThresholdPolicy.quantile(1.0)

    def test_quantile_top_two_of_ten(self):
        scores = [0.1 * i for i in range(10)]
        threshold = ThresholdPolicy.quantile(0.8).resolve(scores)
        assert sum(1 for s in scores if s > threshold) == 2


class TestMaskStep2:
    def md(self, doc, spans=()):
        return MaskedDocument(
            doc=doc, spans=tuple(spans), source_domain="D1", target_domain="D2"
        )

    def test_all_below_threshold_unchanged(self, toy_model):
        doc = make_doc("x", "D1", "a b")
        md = self.md(doc)
        sal = SaliencyVector(doc_id="x", provider="occlusion", scores=(0.1, 0.2))
        out = mask_step2(md, sal, ThresholdPolicy.absolute(0.5))
        assert out.spans == md.spans

    def test_quantile_masks_top_positions(self, toy_model):
        doc = make_doc("x", "D1", " ".join(f"w{i}" for i in range(10)))
        scores = tuple(0.05 * i for i in range(10))
        sal = SaliencyVector(doc_id="x", provider="occlusion", scores=scores)
        out = mask_step2(self.md(doc), sal, ThresholdPolicy.quantile(0.8))
        assert {s.start for s in out.spans} == {8, 9}
        assert all(s.step == "step2" and s.length == 1 for s in out.spans)

    def test_existing_spans_untouched_and_skipped(self):
        doc = make_doc("x", "D1", "t0 t1 t2 t3")
        existing = MaskSpan(3, 1, "step1", 0.5)
        sal = SaliencyVector(
            doc_id="x", provider="occlusion", scores=(0.0, 0.0, 0.9, 1.0)
        )
        out = mask_step2(self.md(doc, [existing]), sal, ThresholdPolicy.absolute(0.5))
        assert existing in out.spans
        starts = {s.start for s in out.spans}
        assert starts == {2, 3}  # position 3 not double-masked

    def test_monotone_growth(self):
        rng = random.Random(31)
        corpus = random_corpus(rng)
        model = train(corpus)
        for doc in corpus.documents[:10]:
            md = self.md(doc)
            sal = occlusion_saliency(doc, model, corpus.domains[0])
            out = mask_step2(md, sal, ThresholdPolicy.quantile(0.8))
            assert set(md.spans) <= set(out.spans)

    def test_length_mismatch_rejected(self, toy_model):
        doc = make_doc("x", "D1", "a b")
        sal = SaliencyVector(doc_id="x", provider="occlusion", scores=(0.1,))
        with pytest.raises(InputError):
            mask_step2(self.md(doc), sal, ThresholdPolicy.absolute(0.5))


class TestExternalSaliency:
    def corpus(self):
        return Corpus(
            documents=(make_doc("d1", "D1", "a b c"), make_doc("d2", "D2", "x y"))
        )

    def write(self, tmp_path, records):
        path = tmp_path / "saliency.jsonl"
        path.write_text(
            "\n".join(json.dumps(r) for r in records) + ("\n" if records else ""),
            encoding="utf-8",
        )
        return path

    def test_empty_file(self, tmp_path):
        assert load_external_saliency(self.write(tmp_path, []), self.corpus()) == {}

    def test_valid_records(self, tmp_path):
        recs = [
            {
                "doc_id": "d1",
                "tokens": ["a", "b", "c"],
                "scores": [0.1, 0.2, 0.3],
                "provider": "external_attention_norm",
            }
        ]
        out = load_external_saliency(self.write(tmp_path, recs), self.corpus())
        assert out["d1"].scores == (0.1, 0.2, 0.3)
        assert out["d1"].provider == "external_attention_norm"

    def test_count_mismatch_names_doc(self, tmp_path):
        recs = [
            {"doc_id": "d1", "tokens": ["a", "b", "c"], "scores": [0.1, 0.2],
             "provider": "external_attention_norm"}
        ]
        with pytest.raises(InputError, match="d1"):
            load_external_saliency(self.write(tmp_path, recs), self.corpus())

    def test_unknown_doc_id(self, tmp_path):
        recs = [
            {"doc_id": "nope", "tokens": ["a"], "scores": [0.1],
             "provider": "external_attention_norm"}
        ]
        with pytest.raises(InputError, match="nope"):
            load_external_saliency(self.write(tmp_path, recs), self.corpus())

    def test_token_mismatch_rejected(self, tmp_path):
        recs = [
            {"doc_id": "d1", "tokens": ["a", "B", "c"], "scores": [0.1, 0.2, 0.3],
             "provider": "external_attention_norm"}
        ]
        with pytest.raises(InputError, match="d1"):
            load_external_saliency(self.write(tmp_path, recs), self.corpus())

    def test_negative_norm_rejected(self, tmp_path):
        recs = [
            {"doc_id": "d2", "tokens": ["x", "y"], "scores": [-0.1, 0.2],
             "provider": "external_attention_norm"}
        ]
        with pytest.raises(InputError):
            load_external_saliency(self.write(tmp_path, recs), self.corpus())

    def test_attention_score_provider_allows_schema(self, tmp_path):
        recs = [
            {"doc_id": "d2", "tokens": ["x", "y"], "scores": [0.5, 0.5],
             "provider": "external_attention_score"}
        ]
        out = load_external_saliency(self.write(tmp_path, recs), self.corpus())
        assert out["d2"].provider == "external_attention_score"

    def test_save_round_trip(self, tmp_path):
        corpus = self.corpus()
        vectors = {
            "d1": SaliencyVector(
                doc_id="d1", provider="external_attention_norm", scores=(0.1, 0.2, 0.3)
            )
        }
        path = tmp_path / "out.jsonl"
        save_saliency(vectors, corpus, path)
        loaded = load_external_saliency(path, corpus)
        assert loaded == vectors
