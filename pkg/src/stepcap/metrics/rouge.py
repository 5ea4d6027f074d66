"""ROUGE-L: LCS-based F measure, micro-averaged over segments."""

from __future__ import annotations

from ..errors import ValidationError

BETA = 1.2


def _tokens(seq) -> tuple[str, ...]:
    return tuple(getattr(seq, "tokens", seq))


def lcs_length(a, b) -> int:
    """Length of the longest common subsequence (O(len(a)*len(b)) table)."""
    xs, ys = _tokens(a), _tokens(b)
    if not xs or not ys:
        return 0
    prev = [0] * (len(ys) + 1)
    for x in xs:
        cur = [0] * (len(ys) + 1)
        for j, y in enumerate(ys, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l_pair(candidate, reference, beta: float = BETA) -> float:
    """Per-segment ROUGE-L F score in [0, 1]; empty candidate scores 0."""
    cand, ref = _tokens(candidate), _tokens(reference)
    if not ref:
        raise ValidationError("rouge_l reference must be non-empty")
    if not cand:
        return 0.0
    lcs = lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    b2 = beta * beta
    return (1 + b2) * precision * recall / (recall + b2 * precision)


def rouge_l(candidates, references, beta: float = BETA) -> float:
    """Mean per-segment ROUGE-L F, percent scale."""
    if len(candidates) != len(references):
        raise ValidationError(
            f"candidate/reference length mismatch: {len(candidates)} != {len(references)}"
        )
    if not candidates:
        raise ValidationError("rouge_l needs at least one segment")
    scores = [rouge_l_pair(c, r, beta) for c, r in zip(candidates, references)]
    return 100.0 * sum(scores) / len(scores)
