"""Per-system, per-fold metric report assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ValidationError
from .bleu import bleu4, sentence_bleu4_smoothed
from .cider import cider, cider_pair, document_frequencies
from .diversity import DiversityReport
from .meteor import meteor, meteor_pair
from .rouge import rouge_l, rouge_l_pair

METRIC_NAMES = ("bleu4", "meteor", "rouge_l", "cider")


@dataclass(frozen=True)
class MetricReport:
    """Micro-averaged captioning metrics for one system on one fold.

    per_segment holds sentence-level scores for paired significance tests;
    the BLEU-4 entries there are add-one smoothed sentence scores, while the
    headline bleu4 stays unsmoothed corpus BLEU.
    """

    system: str
    fold: int
    bleu4: float
    meteor: float
    rouge_l: float
    cider: float
    segment_ids: tuple[str, ...] = ()
    per_segment: dict[str, tuple[float, ...]] = field(default_factory=dict)
    diversity: DiversityReport | None = None

    def __post_init__(self):
        for name in ("bleu4", "meteor", "rouge_l"):
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise ValidationError(f"{name}={value} outside [0, 100]")
        if not 0.0 <= self.cider <= 10.0:
            raise ValidationError(f"cider={self.cider} outside [0, 10]")

    def score(self, metric: str) -> float:
        if metric not in METRIC_NAMES:
            raise ValidationError(f"unknown metric {metric!r}")
        return getattr(self, metric)

    def as_dict(self) -> dict:
        out = {
            "system": self.system,
            "fold": self.fold,
            "bleu4": self.bleu4,
            "meteor": self.meteor,
            "rouge_l": self.rouge_l,
            "cider": self.cider,
        }
        if self.diversity is not None:
            out["diversity"] = self.diversity.as_dict()
        return out


def evaluate(
    system: str,
    fold: int,
    segment_ids,
    candidates,
    references,
    diversity_report: DiversityReport | None = None,
    with_per_segment: bool = True,
) -> MetricReport:
    """Score one system's predictions against single references."""
    if not (len(segment_ids) == len(candidates) == len(references)):
        raise ValidationError("segment_ids/candidates/references length mismatch")
    per_segment: dict[str, tuple[float, ...]] = {}
    if with_per_segment:
        dfs, num_refs = document_frequencies(references)
        per_segment = {
            "bleu4": tuple(
                sentence_bleu4_smoothed(c, r) for c, r in zip(candidates, references)
            ),
            "meteor": tuple(
                100.0 * meteor_pair(c, r) for c, r in zip(candidates, references)
            ),
            "rouge_l": tuple(
                100.0 * rouge_l_pair(c, r) for c, r in zip(candidates, references)
            ),
            "cider": tuple(
                cider_pair(c, r, dfs, num_refs)
                for c, r in zip(candidates, references)
            ),
        }
    return MetricReport(
        system=system,
        fold=fold,
        bleu4=bleu4(candidates, references),
        meteor=meteor(candidates, references),
        rouge_l=rouge_l(candidates, references),
        cider=cider(candidates, references),
        segment_ids=tuple(segment_ids),
        per_segment=per_segment,
        diversity=diversity_report,
    )
