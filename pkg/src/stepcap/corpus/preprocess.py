"""Segment preprocessing: token ids, truncation, BOS/EOS framing."""

from __future__ import annotations

from dataclasses import dataclass

from .types import Segment
from .vocab import BOS, EOS, Vocabulary

MAX_INPUT_TOKENS = 80


@dataclass(frozen=True)
class PreparedExample:
    """A segment mapped to model-ready id sequences."""

    segment_id: str
    input_ids: tuple[int, ...]  # ASR prefix, OOV -> UNK, truncated
    target_ids: tuple[int, ...]  # BOS + caption ids + EOS
    segment: Segment  # kept for frame features / oracle detections


def preprocess(
    segment: Segment,
    vocab: Vocabulary,
    max_input_tokens: int = MAX_INPUT_TOKENS,
) -> PreparedExample:
    """Map a segment to ids: ASR prefix kept up to max_input_tokens, OOV->UNK;
    caption framed with BOS/EOS. An empty ASR yields a length-0 input."""
    input_ids = tuple(vocab.encode(segment.asr.tokens[:max_input_tokens]))
    target_ids = (BOS, *vocab.encode(segment.caption.tokens), EOS)
    return PreparedExample(
        segment_id=segment.segment_id,
        input_ids=input_ids,
        target_ids=target_ids,
        segment=segment,
    )
