"""METEOR with exact and stem alignment stages (no synonym/paraphrase
resources), micro-averaged over segments."""

from __future__ import annotations

from ..errors import ValidationError
from .stemmer import stem

ALPHA = 0.9  # recall weight in F_mean
BETA = 3.0  # chunk penalty exponent
GAMMA = 0.5  # chunk penalty weight


def _tokens(seq) -> tuple[str, ...]:
    return tuple(getattr(seq, "tokens", seq))


def align(candidate, reference) -> list[tuple[int, int]]:
    """Unigram alignment: exact matches first, then stem matches.

    Within a stage, candidate positions are scanned in order and each takes
    the first still-unmatched reference position with an equal (or
    equal-stemmed) token. Returns (candidate_idx, reference_idx) pairs
    sorted by candidate index.
    """
    cand, ref = _tokens(candidate), _tokens(reference)
    cand_free = [True] * len(cand)
    ref_free = [True] * len(ref)
    pairs: list[tuple[int, int]] = []
    for key in (lambda t: t, stem):
        ref_keys = [key(t) for t in ref]
        for ci, tok in enumerate(cand):
            if not cand_free[ci]:
                continue
            want = key(tok)
            for ri, rkey in enumerate(ref_keys):
                if ref_free[ri] and rkey == want:
                    pairs.append((ci, ri))
                    cand_free[ci] = False
                    ref_free[ri] = False
                    break
    return sorted(pairs)


def count_chunks(pairs: list[tuple[int, int]]) -> int:
    """Number of maximal runs of adjacent-in-both-sequences matches."""
    if not pairs:
        return 0
    chunks = 1
    for (pc, pr), (c, r) in zip(pairs, pairs[1:]):
        if c != pc + 1 or r != pr + 1:
            chunks += 1
    return chunks


def meteor_pair(candidate, reference) -> float:
    """Per-segment METEOR in [0, 1]."""
    cand, ref = _tokens(candidate), _tokens(reference)
    if not ref:
        raise ValidationError("meteor reference must be non-empty")
    if not cand:
        return 0.0
    pairs = align(cand, ref)
    matches = len(pairs)
    if matches == 0:
        return 0.0
    precision = matches / len(cand)
    recall = matches / len(ref)
    f_mean = precision * recall / (ALPHA * precision + (1 - ALPHA) * recall)
    penalty = GAMMA * (count_chunks(pairs) / matches) ** BETA
    return f_mean * (1.0 - penalty)


def meteor(candidates, references) -> float:
    """Mean per-segment METEOR, percent scale."""
    if len(candidates) != len(references):
        raise ValidationError(
            f"candidate/reference length mismatch: {len(candidates)} != {len(references)}"
        )
    if not candidates:
        raise ValidationError("meteor needs at least one segment")
    scores = [meteor_pair(c, r) for c, r in zip(candidates, references)]
    return 100.0 * sum(scores) / len(scores)
