"""Corpus BLEU-4 micro-averaged at the segment level, plus smoothed
sentence-level scores for paired significance testing."""

from __future__ import annotations

import math
from collections import Counter

from ..errors import ValidationError

MAX_ORDER = 4


def _tokens(seq) -> tuple[str, ...]:
    return tuple(getattr(seq, "tokens", seq))


def ngram_counts(tokens, n: int) -> Counter:
    toks = _tokens(tokens)
    return Counter(tuple(toks[i : i + n]) for i in range(len(toks) - n + 1))


def clipped_matches(candidate, reference, n: int) -> tuple[int, int]:
    """(clipped n-gram matches, candidate n-gram total) for one segment."""
    cand = ngram_counts(candidate, n)
    ref = ngram_counts(reference, n)
    matches = sum(min(c, ref.get(g, 0)) for g, c in cand.items())
    total = max(0, len(_tokens(candidate)) - n + 1)
    return matches, total


def bleu4(candidates, references) -> float:
    """Corpus BLEU: clipped precisions pooled over all segments for n=1..4,
    geometric mean, brevity penalty exp(1 - r/c) when c < r; percent scale.

    Any order with zero pooled matches, or with no candidate n-grams at all,
    sends the score to 0 by convention.
    """
    if len(candidates) != len(references):
        raise ValidationError(
            f"candidate/reference length mismatch: {len(candidates)} != {len(references)}"
        )
    if not candidates:
        raise ValidationError("bleu4 needs at least one segment")
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(_tokens(cand))
        ref_len += len(_tokens(ref))
        for n in range(1, MAX_ORDER + 1):
            m, t = clipped_matches(cand, ref, n)
            matches[n - 1] += m
            totals[n - 1] += t
    if any(t == 0 for t in totals) or any(m == 0 for m in matches):
        return 0.0
    log_precision = sum(math.log(m / t) for m, t in zip(matches, totals)) / MAX_ORDER
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return 100.0 * bp * math.exp(log_precision)


def sentence_bleu4_smoothed(candidate, reference) -> float:
    """Add-one smoothed sentence BLEU (percent) for per-segment pairing.

    Smoothing adds one to every order's matches and total, so short pairs
    without 4-grams still get a usable nonzero score.
    """
    cand = _tokens(candidate)
    ref = _tokens(reference)
    if len(cand) == 0:
        return 0.0
    log_precision = 0.0
    for n in range(1, MAX_ORDER + 1):
        m, t = clipped_matches(cand, ref, n)
        log_precision += math.log((m + 1) / (t + 1))
    bp = 1.0 if len(cand) >= len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return 100.0 * bp * math.exp(log_precision / MAX_ORDER)
