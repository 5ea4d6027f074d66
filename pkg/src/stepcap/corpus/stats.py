"""Corpus summary statistics (ASR length, words-per-minute, caption length)."""

from __future__ import annotations

import statistics

from ..errors import ValidationError
from .types import Corpus, CorpusStats


def compute_stats(corpus: Corpus) -> CorpusStats:
    """Segment-level statistics over a non-empty corpus.

    WPM per segment = |asr tokens| / (duration minutes); the corpus mean is
    over segments with positive duration. zero_asr_fraction is the share of
    segments with an empty ASR sequence.
    """
    segments = corpus.segments()
    if not segments:
        raise ValidationError("cannot compute statistics of an empty corpus")
    asr_lens = [len(s.asr) for s in segments]
    cap_lens = [len(s.caption) for s in segments]
    wpm = [
        len(s.asr) / (s.duration_s / 60.0)
        for s in segments
        if s.duration_s > 0
    ]
    return CorpusStats(
        asr_len_mean=statistics.fmean(asr_lens),
        asr_len_median=float(statistics.median(asr_lens)),
        zero_asr_fraction=sum(1 for n in asr_lens if n == 0) / len(segments),
        wpm_mean=statistics.fmean(wpm) if wpm else 0.0,
        caption_len_mean=statistics.fmean(cap_lens),
        segments_per_video_mean=len(segments) / len(corpus.videos),
        num_videos=len(corpus.videos),
        num_segments=len(segments),
    )
