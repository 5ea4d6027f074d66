"""stepcap: a benchmark toolkit for captioning instructional-video segments
from ASR tokens and visual frame features.

Subpackages: corpus (data model, ingestion, splits, synthesis), baselines
(constant/ASR/filtered/retrieval/oracle), metrics (BLEU-4, ROUGE-L, METEOR,
CIDEr-D, diversity), stats (significance tests, rank statistics), neural
(multimodal Transformer on a hand-built autodiff), analysis (per-word
modality complementarity), cli (experiment orchestration).
"""

__version__ = "0.1.0"

from . import analysis, baselines, corpus, metrics, neural, stats
from .errors import (
    ConfigError,
    ParseError,
    StepcapError,
    TrainingDivergedError,
    ValidationError,
)

__all__ = [
    "ConfigError", "ParseError", "StepcapError", "TrainingDivergedError",
    "ValidationError", "analysis", "baselines", "corpus", "metrics",
    "neural", "stats", "__version__",
]
