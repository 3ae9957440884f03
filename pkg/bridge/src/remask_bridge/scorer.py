"""Attention-based token saliency from a fine-tuned encoder checkpoint.

For layer l, the contribution of token j to the classification position is
sum over heads of a_h(cls, j) * f_h(x_j), with f_h(x) = (x W_V + b_V) W_O
restricted to head h and x the layer's input state. The saliency is the
Euclidean norm of that vector (or the plain attention weight in the
attention-score variant), summed over the subwords of each word and
aggregated across the configured layers.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch
from transformers import PreTrainedTokenizerFast, RobertaForSequenceClassification

from .finetune import MAX_SUBWORDS, META_FILE
from .wordtok import word_tokenize

ATTENTION_NORM = "norm"
ATTENTION_SCORE = "score"
DEFAULT_LAYERS = (3, 4)


class AttentionScorer:
    """Serve word-level saliency and domain probabilities from a checkpoint."""

    def __init__(
        self,
        model_path: str | Path,
        layers=DEFAULT_LAYERS,
        aggregation: str = "mean",
        attention: str = ATTENTION_NORM,
    ):
        model_path = Path(model_path)
        meta = json.loads((model_path / META_FILE).read_text(encoding="utf-8"))
        self.domains: list[str] = meta["domains"]
        # eager attention: the fused kernels do not expose attention weights
        self.model = RobertaForSequenceClassification.from_pretrained(
            model_path, attn_implementation="eager"
        )
        self.model.eval()
        self.tokenizer = PreTrainedTokenizerFast.from_pretrained(model_path)
        n_layers = self.model.config.num_hidden_layers
        layers = tuple(int(l) for l in layers)
        if not layers or not all(1 <= l <= n_layers for l in layers):
            raise ValueError(f"layers must lie in 1..{n_layers}, got {layers}")
        if aggregation not in ("mean", "max"):
            raise ValueError(f"aggregation must be mean or max, got {aggregation!r}")
        if attention not in (ATTENTION_NORM, ATTENTION_SCORE):
            raise ValueError(f"attention must be norm or score, got {attention!r}")
        self.layers = layers
        self.aggregation = aggregation
        self.attention = attention

    @property
    def provider(self) -> str:
        if self.attention == ATTENTION_SCORE:
            return "external_attention_score"
        return "external_attention_norm"

    @torch.no_grad()
    def score(self, text: str) -> tuple[list[str], list[float], list[float]]:
        """Word tokens, per-word saliency and the domain distribution."""
        words = word_tokenize(text)
        enc = self.tokenizer(
            words if words else [""],
            is_split_into_words=True,
            truncation=True,
            max_length=MAX_SUBWORDS,
            return_tensors="pt",
        )
        out = self.model(
            input_ids=enc["input_ids"],
            attention_mask=enc["attention_mask"],
            output_attentions=True,
            output_hidden_states=True,
        )
        proba = torch.softmax(out.logits[0], dim=-1).tolist()
        if not words:
            return [], [], proba

        word_ids = enc.word_ids(0)
        per_layer = []
        for layer_no in self.layers:
            subword_scores = self._layer_scores(out, layer_no)
            word_scores = torch.zeros(len(words))
            for pos, wid in enumerate(word_ids):
                if wid is not None:
                    word_scores[wid] += subword_scores[pos]
            per_layer.append(word_scores)
        stacked = torch.stack(per_layer)
        if self.aggregation == "mean":
            saliency = stacked.mean(dim=0)
        else:
            saliency = stacked.max(dim=0).values
        return words, [float(s) for s in saliency], proba

    def _layer_scores(self, out, layer_no: int) -> torch.Tensor:
        """Per-subword saliency for one 1-indexed encoder layer."""
        attn = out.attentions[layer_no - 1][0]  # [heads, seq, seq]
        cls_attn = attn[:, 0, :]  # [heads, seq]
        if self.attention == ATTENTION_SCORE:
            return cls_attn.mean(dim=0)

        layer = self.model.roberta.encoder.layer[layer_no - 1]
        states = out.hidden_states[layer_no - 1][0]  # input to this layer
        value = layer.attention.self.value(states)  # [seq, hidden]
        seq_len, hidden = value.shape
        n_heads = self.model.config.num_attention_heads
        head_dim = hidden // n_heads
        value = value.view(seq_len, n_heads, head_dim)
        # output projection split by the head each input block belongs to
        w_o = layer.attention.output.dense.weight.T.view(n_heads, head_dim, hidden)
        transformed = torch.einsum("shd,hdo->sho", value, w_o)  # [seq, heads, hidden]
        weighted = torch.einsum("hs,sho->so", cls_attn, transformed)
        return weighted.norm(dim=-1)  # [seq]
