"""Corpus data model, ingestion, statistics, vocabulary, splits, synthesis."""

from .folds import FoldSplit, load_splits, make_folds, save_splits
from .io import emit, ingest, read_features, write_features
from .preprocess import MAX_INPUT_TOKENS, PreparedExample, preprocess
from .stats import compute_stats
from .synthetic import (
    SynthSpec,
    acceptance_preset,
    generate_synthetic_corpus,
    tiny_preset,
)
from .types import (
    DEFAULT_CONSTANT_CAPTION,
    Corpus,
    CorpusStats,
    FrameFeatureSet,
    Segment,
    TokenSequence,
    Video,
    tokenize,
)
from .vocab import BOS, EOS, PAD, RESERVED, UNK, Vocabulary, build_vocabulary

__all__ = [
    "BOS", "EOS", "PAD", "UNK", "RESERVED",
    "Corpus", "CorpusStats", "DEFAULT_CONSTANT_CAPTION", "FoldSplit",
    "FrameFeatureSet", "MAX_INPUT_TOKENS", "PreparedExample", "Segment",
    "SynthSpec", "TokenSequence", "Video", "Vocabulary",
    "acceptance_preset", "build_vocabulary", "compute_stats", "emit",
    "generate_synthetic_corpus", "ingest", "load_splits", "make_folds",
    "preprocess", "read_features", "save_splits", "tiny_preset", "tokenize",
    "write_features",
]
