"""Diversity statistics: vocabulary coverage, proportion not copied from
training captions, and output uniqueness."""

from __future__ import annotations

from dataclasses import dataclass

from ..corpus.vocab import Vocabulary
from ..errors import ValidationError


def _tokens(seq) -> tuple[str, ...]:
    return tuple(getattr(seq, "tokens", seq))


@dataclass(frozen=True)
class DiversityReport:
    vocab_coverage: float  # percent of vocab types predicted at least once
    pct_not_copied: float  # percent of predictions not verbatim in training
    pct_unique: float  # percent of distinct prediction strings

    def as_dict(self) -> dict:
        return {
            "vocab_coverage": self.vocab_coverage,
            "pct_not_copied": self.pct_not_copied,
            "pct_unique": self.pct_unique,
        }


def diversity(predictions, train_captions, vocab: Vocabulary) -> DiversityReport:
    """Compute the three diversity statistics for one system on one fold."""
    if not predictions:
        raise ValidationError("diversity needs at least one prediction")
    preds = [_tokens(p) for p in predictions]
    train = {_tokens(c) for c in train_captions}
    predicted_types = set()
    for p in preds:
        predicted_types.update(p)
    vocab_types = set(vocab.words())
    coverage = (
        100.0 * len(predicted_types & vocab_types) / len(vocab_types)
        if vocab_types
        else 0.0
    )
    not_copied = 100.0 * sum(1 for p in preds if p not in train) / len(preds)
    unique = 100.0 * len(set(preds)) / len(preds)
    return DiversityReport(
        vocab_coverage=coverage, pct_not_copied=not_copied, pct_unique=unique
    )
