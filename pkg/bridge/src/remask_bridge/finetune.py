"""Sequence-classification fine-tuning of a small 6-layer encoder over
domain labels, trained from the consumer's JSONL corpus format."""

from __future__ import annotations

import json
from pathlib import Path

import torch
from tokenizers import Tokenizer, models, pre_tokenizers, processors, trainers
from transformers import (
    PreTrainedTokenizerFast,
    RobertaConfig,
    RobertaForSequenceClassification,
)

from .wordtok import word_tokenize

MAX_SUBWORDS = 256
META_FILE = "bridge_meta.json"


class CorpusFormatError(ValueError):
    pass


def read_corpus(path: str | Path) -> list[dict]:
    """Records with id, domain, text (the consumer's corpus file format)."""
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}: line {lineno}: invalid JSON ({exc})") from exc
            missing = {"id", "domain", "text"} - rec.keys()
            if missing:
                raise CorpusFormatError(
                    f"{path}: line {lineno}: missing field(s) {sorted(missing)}"
                )
            records.append(rec)
    return records


def build_tokenizer(texts: list[list[str]], vocab_size: int) -> PreTrainedTokenizerFast:
    """Byte-pair tokenizer trained on the corpus; wraps with <s>/</s> so the
    classification token sits at position 0."""
    tok = Tokenizer(models.BPE(unk_token="<unk>"))
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    trainer = trainers.BpeTrainer(
        vocab_size=vocab_size,
        special_tokens=["<s>", "</s>", "<pad>", "<unk>", "<mask>"],
    )
    tok.train_from_iterator((" ".join(words) for words in texts), trainer=trainer)
    tok.post_processor = processors.TemplateProcessing(
        single="<s> $A </s>",
        pair="<s> $A </s> </s> $B </s>",
        special_tokens=[("<s>", tok.token_to_id("<s>")), ("</s>", tok.token_to_id("</s>"))],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=tok,
        bos_token="<s>",
        eos_token="</s>",
        cls_token="<s>",
        sep_token="</s>",
        pad_token="<pad>",
        unk_token="<unk>",
        mask_token="<mask>",
    )


def fine_tune(
    corpus_path: str | Path,
    output_path: str | Path,
    epochs: int = 5,
    seed: int = 0,
    hidden_size: int = 96,
    num_layers: int = 6,
    num_heads: int = 4,
    vocab_size: int = 2000,
    batch_size: int = 16,
    learning_rate: float = 5e-4,
) -> Path:
    """Train a domain classifier from scratch and save a servable checkpoint.

    Deterministic for a fixed seed on a fixed runtime. The encoder keeps the
    6-layer shape whose middle layers supply the attention saliency.
    """
    records = read_corpus(corpus_path)
    domains = list(dict.fromkeys(rec["domain"] for rec in records))
    if len(domains) < 2:
        raise CorpusFormatError(f"need at least 2 domains, got {domains}")
    label_of = {d: i for i, d in enumerate(domains)}

    texts = [word_tokenize(rec["text"]) for rec in records]
    labels = [label_of[rec["domain"]] for rec in records]

    torch.manual_seed(seed)
    tokenizer = build_tokenizer(texts, vocab_size)
    config = RobertaConfig(
        vocab_size=tokenizer.vocab_size,
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=num_heads,
        intermediate_size=hidden_size * 2,
        max_position_embeddings=MAX_SUBWORDS + 4,
        num_labels=len(domains),
        pad_token_id=tokenizer.pad_token_id,
        bos_token_id=tokenizer.bos_token_id,
        eos_token_id=tokenizer.eos_token_id,
    )
    model = RobertaForSequenceClassification(config)
    model.train()
    optimizer = torch.optim.AdamW(model.parameters(), lr=learning_rate, weight_decay=1e-5)

    generator = torch.Generator().manual_seed(seed)
    n = len(records)
    for _ in range(epochs):
        order = torch.randperm(n, generator=generator).tolist()
        for start in range(0, n, batch_size):
            batch_idx = order[start : start + batch_size]
            enc = tokenizer(
                [texts[i] for i in batch_idx],
                is_split_into_words=True,
                padding=True,
                truncation=True,
                max_length=MAX_SUBWORDS,
                return_tensors="pt",
            )
            target = torch.tensor([labels[i] for i in batch_idx])
            out = model(**enc, labels=target)
            out.loss.backward()
            optimizer.step()
            optimizer.zero_grad()

    output_path = Path(output_path)
    output_path.mkdir(parents=True, exist_ok=True)
    model.eval()
    model.save_pretrained(output_path)
    tokenizer.save_pretrained(output_path)
    meta = {"domains": domains, "num_layers": num_layers}
    (output_path / META_FILE).write_text(json.dumps(meta), encoding="utf-8")
    return output_path
