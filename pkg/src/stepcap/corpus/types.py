"""Core corpus data model: tokens, segments, videos, and summary statistics.

All values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError

_TOKEN_RE = re.compile(r"[a-z0-9']+|[^\sa-z0-9']")


def tokenize(text: str) -> list[str]:
    """Lowercase, split punctuation into separate tokens, split on whitespace.

    Apostrophes stay word-internal ("don't" is one token).
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class TokenSequence:
    """A sequence of lowercase, whitespace-free word tokens."""

    tokens: tuple[str, ...]
    source: str  # "asr" | "caption" | "generated"

    def __post_init__(self):
        for tok in self.tokens:
            if not tok or any(c.isspace() for c in tok):
                raise ValidationError(f"bad token {tok!r} in {self.source} sequence")

    def __len__(self) -> int:
        return len(self.tokens)

    def text(self) -> str:
        return " ".join(self.tokens)

    @staticmethod
    def from_text(text: str, source: str) -> "TokenSequence":
        return TokenSequence(tuple(tokenize(text)), source)

    @staticmethod
    def from_tokens(tokens, source: str) -> "TokenSequence":
        """Normalize a pre-split token list through the corpus tokenizer."""
        return TokenSequence.from_text(" ".join(tokens), source)


@dataclass(frozen=True)
class FrameFeatureSet:
    """F temporally ordered frame feature rows of a fixed dimension D."""

    matrix: np.ndarray  # (F, D) float32
    frame_times: tuple[float, ...] | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.float32)
        if mat.ndim != 2:
            raise ValidationError(f"frame matrix must be 2-D, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValidationError("frame matrix contains non-finite values")
        if self.frame_times is not None:
            if len(self.frame_times) != mat.shape[0]:
                raise ValidationError("frame_times length does not match frame count")
            if any(b < a for a, b in zip(self.frame_times, self.frame_times[1:])):
                raise ValidationError("frame_times must be nondecreasing")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def num_frames(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    @staticmethod
    def empty(dim: int) -> "FrameFeatureSet":
        return FrameFeatureSet(np.zeros((0, max(dim, 0)), dtype=np.float32))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrameFeatureSet):
            return NotImplemented
        return (
            self.matrix.shape == other.matrix.shape
            and np.array_equal(self.matrix, other.matrix)
            and self.frame_times == other.frame_times
        )


@dataclass(frozen=True)
class Segment:
    """One annotated video interval: ground-truth caption, ASR tokens, frames."""

    segment_id: str
    start_s: float
    end_s: float
    caption: TokenSequence
    asr: TokenSequence
    frames: FrameFeatureSet

    def __post_init__(self):
        object.__setattr__(self, "start_s", float(self.start_s))
        object.__setattr__(self, "end_s", float(self.end_s))
        if not self.start_s < self.end_s:
            raise ValidationError(
                f"segment {self.segment_id!r}: start_s must be < end_s "
                f"({self.start_s} >= {self.end_s})"
            )
        if len(self.caption) == 0:
            raise ValidationError(f"segment {self.segment_id!r}: caption is empty")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class Video:
    """A video with its ordered, non-overlapping annotated segments."""

    video_id: str
    duration_s: float
    segments: tuple[Segment, ...]
    language_hint: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "duration_s", float(self.duration_s))
        if self.duration_s <= 0:
            raise ValidationError(f"video {self.video_id!r}: duration_s must be > 0")
        ordered = tuple(sorted(self.segments, key=lambda s: (s.start_s, s.segment_id)))
        object.__setattr__(self, "segments", ordered)
        seen = set()
        prev = None
        for seg in ordered:
            if seg.segment_id in seen:
                raise ValidationError(
                    f"video {self.video_id!r}: duplicate segment_id {seg.segment_id!r}"
                )
            seen.add(seg.segment_id)
            if seg.start_s < 0 or seg.end_s > self.duration_s:
                raise ValidationError(
                    f"segment {seg.segment_id!r} outside [0, {self.duration_s}]"
                )
            if prev is not None and seg.start_s < prev.end_s:
                raise ValidationError(
                    f"segment {seg.segment_id!r} overlaps {prev.segment_id!r}"
                )
            prev = seg


@dataclass(frozen=True)
class Corpus:
    """All videos of a dataset, ordered by video_id, with a shared feature dim."""

    videos: tuple[Video, ...]
    feature_dim: int = 0  # 0 means the corpus carries no frame features

    def __post_init__(self):
        ordered = tuple(sorted(self.videos, key=lambda v: v.video_id))
        object.__setattr__(self, "videos", ordered)
        ids = [v.video_id for v in ordered]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate video_id in corpus")
        for video in ordered:
            for seg in video.segments:
                if seg.frames.num_frames > 0 and seg.frames.dim != self.feature_dim:
                    raise ValidationError(
                        f"segment {seg.segment_id!r}: feature dim {seg.frames.dim} "
                        f"!= corpus dim {self.feature_dim}"
                    )

    def segments(self) -> list[Segment]:
        return [seg for video in self.videos for seg in video.segments]

    def video_ids(self) -> list[str]:
        return [v.video_id for v in self.videos]

    def __len__(self) -> int:
        return len(self.videos)


@dataclass(frozen=True)
class CorpusStats:
    """Segment-level summary statistics of a corpus."""

    asr_len_mean: float
    asr_len_median: float
    zero_asr_fraction: float
    wpm_mean: float
    caption_len_mean: float
    segments_per_video_mean: float
    num_videos: int = 0
    num_segments: int = 0

    def as_dict(self) -> dict:
        return {
            "asr_len_mean": self.asr_len_mean,
            "asr_len_median": self.asr_len_median,
            "zero_asr_fraction": self.zero_asr_fraction,
            "wpm_mean": self.wpm_mean,
            "caption_len_mean": self.caption_len_mean,
            "segments_per_video_mean": self.segments_per_video_mean,
            "num_videos": self.num_videos,
            "num_segments": self.num_segments,
        }


# default caption for the constant-prediction baseline
DEFAULT_CONSTANT_CAPTION = (
    "heat some oil in a pan and add salt and pepper to the pan and stir"
)
