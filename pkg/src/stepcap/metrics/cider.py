"""CIDEr-D: consensus tf-idf n-gram similarity with clipping and a Gaussian
length penalty, idf taken from the evaluation reference set."""

from __future__ import annotations

import math
import warnings
from collections import Counter

from ..errors import ValidationError

MAX_ORDER = 4
SIGMA = 6.0


def _tokens(seq) -> tuple[str, ...]:
    return tuple(getattr(seq, "tokens", seq))


def _counts_by_order(tokens) -> list[Counter]:
    toks = _tokens(tokens)
    out = []
    for n in range(1, MAX_ORDER + 1):
        out.append(Counter(tuple(toks[i : i + n]) for i in range(len(toks) - n + 1)))
    return out


def document_frequencies(references) -> tuple[list[Counter], int]:
    """df per n-gram over the reference set; returns (df by order, N refs)."""
    dfs = [Counter() for _ in range(MAX_ORDER)]
    for ref in references:
        for n, counts in enumerate(_counts_by_order(ref)):
            for gram in counts:
                dfs[n][gram] += 1
    return dfs, len(references)


def _tfidf(counts: Counter, df: Counter, log_n: float) -> tuple[dict, float]:
    vec = {}
    norm_sq = 0.0
    for gram, tf in counts.items():
        weight = tf * (log_n - math.log(max(1.0, df.get(gram, 0))))
        vec[gram] = weight
        norm_sq += weight * weight
    return vec, math.sqrt(norm_sq)


def cider_pair(
    candidate, reference, dfs: list[Counter], num_refs: int
) -> float:
    """Per-segment CIDEr-D in [0, 10]."""
    cand_counts = _counts_by_order(candidate)
    ref_counts = _counts_by_order(reference)
    log_n = math.log(max(1, num_refs))
    delta = len(_tokens(candidate)) - len(_tokens(reference))
    penalty = math.exp(-(delta * delta) / (2.0 * SIGMA * SIGMA))
    total = 0.0
    for n in range(MAX_ORDER):
        cvec, cnorm = _tfidf(cand_counts[n], dfs[n], log_n)
        rvec, rnorm = _tfidf(ref_counts[n], dfs[n], log_n)
        if cnorm == 0.0 or rnorm == 0.0:
            continue
        # clipped numerator: min(candidate, reference) weight times reference
        sim = sum(min(w, rvec.get(gram, 0.0)) * rvec.get(gram, 0.0)
                  for gram, w in cvec.items())
        total += sim / (cnorm * rnorm) * penalty
    return 10.0 * total / MAX_ORDER


def cider(candidates, references, idf_references=None) -> float:
    """Corpus CIDEr-D: mean per-segment score, in [0, 10].

    idf comes from idf_references when given, else from `references` (the
    evaluation reference set). A single-segment reference set makes every
    idf zero; the score degenerates to 0 with a warning.
    """
    if len(candidates) != len(references):
        raise ValidationError(
            f"candidate/reference length mismatch: {len(candidates)} != {len(references)}"
        )
    if not candidates:
        raise ValidationError("cider needs at least one segment")
    source = references if idf_references is None else idf_references
    dfs, num_refs = document_frequencies(source)
    if num_refs < 2:
        warnings.warn("cider over a single reference segment: all idf are zero",
                      stacklevel=2)
    scores = [cider_pair(c, r, dfs, num_refs) for c, r in zip(candidates, references)]
    return sum(scores) / len(scores)
