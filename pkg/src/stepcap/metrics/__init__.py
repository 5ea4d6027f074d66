"""Segment-level micro-averaged captioning metrics and diversity statistics."""

from .bleu import bleu4, clipped_matches, ngram_counts, sentence_bleu4_smoothed
from .cider import cider, cider_pair, document_frequencies
from .diversity import DiversityReport, diversity
from .meteor import meteor, meteor_pair
from .report import METRIC_NAMES, MetricReport, evaluate
from .rouge import lcs_length, rouge_l, rouge_l_pair
from .stemmer import stem

__all__ = [
    "METRIC_NAMES", "MetricReport", "DiversityReport",
    "bleu4", "cider", "cider_pair", "clipped_matches", "diversity",
    "document_frequencies", "evaluate", "lcs_length", "meteor", "meteor_pair",
    "ngram_counts", "rouge_l", "rouge_l_pair", "sentence_bleu4_smoothed",
    "stem",
]
