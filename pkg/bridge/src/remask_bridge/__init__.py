"""remask-bridge: transformer attention-saliency scorer for the masking pipeline."""

from .finetune import fine_tune, read_corpus
from .protocol import handle_line, score_batch, serve
from .scorer import AttentionScorer
from .wordtok import word_tokenize

__version__ = "0.1.0"

__all__ = [
    "AttentionScorer",
    "fine_tune",
    "handle_line",
    "read_corpus",
    "score_batch",
    "serve",
    "word_tokenize",
]
