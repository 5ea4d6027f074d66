"""Vocabulary construction from training-split ground-truth captions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..errors import ValidationError
from .types import Segment

PAD, UNK, BOS, EOS = 0, 1, 2, 3
RESERVED = ("<pad>", "<unk>", "<bos>", "<eos>")


@dataclass(frozen=True)
class Vocabulary:
    """word<->id map over caption tokens, with PAD/UNK/BOS/EOS reserved."""

    id_to_word: tuple[str, ...]
    min_count: int
    word_to_id: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.id_to_word[: len(RESERVED)] != RESERVED:
            raise ValidationError("vocabulary must start with the reserved tokens")
        mapping = {w: i for i, w in enumerate(self.id_to_word)}
        if len(mapping) != len(self.id_to_word):
            raise ValidationError("duplicate word in vocabulary")
        object.__setattr__(self, "word_to_id", mapping)

    def __len__(self) -> int:
        return len(self.id_to_word)

    def __contains__(self, word: str) -> bool:
        return word in self.word_to_id

    def id_of(self, word: str) -> int:
        return self.word_to_id.get(word, UNK)

    def word_of(self, idx: int) -> str:
        return self.id_to_word[idx]

    def words(self) -> tuple[str, ...]:
        """Non-reserved vocabulary entries."""
        return self.id_to_word[len(RESERVED):]

    def encode(self, tokens) -> list[int]:
        return [self.id_of(t) for t in tokens]

    def decode(self, ids) -> list[str]:
        return [self.id_to_word[i] for i in ids]


def build_vocabulary(train_segments: list[Segment], min_count: int = 5) -> Vocabulary:
    """Build a vocabulary over the training ground-truth caption tokens.

    Words occurring fewer than min_count times are excluded. The vocabulary
    is rebuilt independently per cross-validation fold.
    """
    if not train_segments:
        raise ValidationError("cannot build a vocabulary from zero training segments")
    counts = Counter()
    for seg in train_segments:
        counts.update(seg.caption.tokens)
    kept = [w for w, c in counts.items() if c >= min_count]
    if not kept:
        raise ValidationError(
            f"no caption word reaches min_count={min_count}; vocabulary would be empty"
        )
    kept.sort(key=lambda w: (-counts[w], w))
    return Vocabulary(id_to_word=RESERVED + tuple(kept), min_count=min_count)
