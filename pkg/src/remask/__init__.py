"""remask: three-step domain obfuscation for text.

Mask domain-specific cues via n-gram affinity statistics, over-mask with
model saliency, then greedily unmask while a domain-confidence guard holds.
"""

from .affinity import DomainAffinity, build_table, mask_step1
from .classifier import MultinomialDomainClassifier, train
from .corpus import Corpus, Document, detokenize, extract_ngrams, load_corpus, tokenize
from .evaluation import LeakageReport, MaskCountReport, leakage_eval, mask_count_report
from .masking import MaskedDocument, MaskSpan, render
from .pipeline import (
    DomainObfuscator,
    ObfuscationResult,
    PipelineConfig,
    naive_infill,
    read_results,
    run_pipeline,
    write_results,
)
from .saliency import (
    SaliencyVector,
    ThresholdPolicy,
    load_external_saliency,
    mask_step2,
    occlusion_saliency,
    save_saliency,
)
from .stemming import stem
from .unmask import UnmaskTrace, unmask_gain, unmask_step3
from .validation import ConfigError, InputError

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Corpus",
    "Document",
    "DomainAffinity",
    "DomainObfuscator",
    "InputError",
    "LeakageReport",
    "MaskCountReport",
    "MaskSpan",
    "MaskedDocument",
    "MultinomialDomainClassifier",
    "ObfuscationResult",
    "PipelineConfig",
    "SaliencyVector",
    "ThresholdPolicy",
    "UnmaskTrace",
    "build_table",
    "detokenize",
    "extract_ngrams",
    "leakage_eval",
    "load_corpus",
    "load_external_saliency",
    "mask_count_report",
    "mask_step1",
    "mask_step2",
    "naive_infill",
    "occlusion_saliency",
    "read_results",
    "render",
    "run_pipeline",
    "save_saliency",
    "stem",
    "tokenize",
    "train",
    "unmask_gain",
    "unmask_step3",
    "write_results",
]
