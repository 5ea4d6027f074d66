"""Non-neural caption producers: constant prediction, ASR-as-caption,
ratio-filtered ASR, tf-idf retrieval, and the oracle object detector."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .corpus.types import DEFAULT_CONSTANT_CAPTION, Segment, TokenSequence, tokenize
from .errors import ValidationError

# ---------------------------------------------------------------------------
# constant prediction
# ---------------------------------------------------------------------------


def constant_caption_tokens(caption: str = DEFAULT_CONSTANT_CAPTION) -> tuple[str, ...]:
    return tuple(tokenize(caption))


def predict_constant(
    segment: Segment, caption: str = DEFAULT_CONSTANT_CAPTION
) -> TokenSequence:
    """The configured constant caption, identical for every segment."""
    del segment
    return TokenSequence(constant_caption_tokens(caption), "generated")


def derive_constant_caption(train_captions, max_len: int = 15) -> str:
    """Re-derive a constant sentence from training captions by chaining the
    most frequent bigrams from the most frequent caption-initial word."""
    captions = [tuple(getattr(c, "tokens", c)) for c in train_captions]
    if not captions:
        raise ValidationError("need at least one training caption")
    starts = Counter(c[0] for c in captions if c)
    bigrams = Counter()
    for cap in captions:
        bigrams.update(zip(cap, cap[1:]))
    word = starts.most_common(1)[0][0]
    out = [word]
    while len(out) < max_len:
        candidates = [(g, n) for g, n in bigrams.items() if g[0] == word]
        if not candidates:
            break
        candidates.sort(key=lambda kv: (-kv[1], kv[0]))
        word = candidates[0][0][1]
        out.append(word)
    return " ".join(out)


# ---------------------------------------------------------------------------
# ASR as the caption
# ---------------------------------------------------------------------------


def predict_asc(segment: Segment) -> TokenSequence:
    """The test-time ASR token sequence, verbatim (pre-truncation)."""
    return TokenSequence(segment.asr.tokens, "generated")


# ---------------------------------------------------------------------------
# filtered ASR
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FascModel:
    """Keep-list scores r(w) = P(w|GT) / P(w|ASR) with add-one smoothing,
    fitted on the training split only."""

    ratio: dict[str, float]
    keep_threshold: float = 1.0
    trained_on: int = -1


def fit_fasc(train_segments, keep_threshold: float = 1.0, fold_index: int = -1) -> FascModel:
    """Fit the token-keeping ratio over a training split.

    P(w|GT) = (count_GT(w)+1)/(N_GT+V) and P(w|ASR) = (count_ASR(w)+1)/
    (N_ASR+V), where V is the number of word types in train GT union ASR.
    """
    train_segments = list(train_segments)
    if not train_segments:
        raise ValidationError("fit_fasc needs a non-empty training split")
    gt_counts = Counter()
    asr_counts = Counter()
    for seg in train_segments:
        gt_counts.update(seg.caption.tokens)
        asr_counts.update(seg.asr.tokens)
    vocab_union = set(gt_counts) | set(asr_counts)
    V = len(vocab_union)
    n_gt = sum(gt_counts.values())
    n_asr = sum(asr_counts.values())
    ratio = {}
    for word in vocab_union:
        p_gt = (gt_counts.get(word, 0) + 1) / (n_gt + V)
        p_asr = (asr_counts.get(word, 0) + 1) / (n_asr + V)
        ratio[word] = p_gt / p_asr
    return FascModel(ratio=ratio, keep_threshold=keep_threshold, trained_on=fold_index)


def predict_fasc(model: FascModel, segment: Segment) -> TokenSequence:
    """ASR tokens in original order, keeping only words with a ratio above
    the threshold; words unseen in training are dropped."""
    kept = tuple(
        tok
        for tok in segment.asr.tokens
        if model.ratio.get(tok, 0.0) > model.keep_threshold
    )
    return TokenSequence(kept, "generated")


# ---------------------------------------------------------------------------
# tf-idf retrieval
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RetrievalIndex:
    """Training captions as tf-idf vectors (raw tf, natural-log idf)."""

    idf: dict[str, float]
    captions: tuple[tuple[str, ...], ...]
    vectors: tuple[dict[str, float], ...] = field(compare=False, default=())
    norms: tuple[float, ...] = field(compare=False, default=())
    trained_on: int = -1
    fallback: tuple[str, ...] = constant_caption_tokens()


def _tfidf_vector(tokens, idf: dict[str, float]) -> tuple[dict[str, float], float]:
    counts = Counter(t for t in tokens if t in idf)
    vec = {w: c * idf[w] for w, c in counts.items()}
    norm = math.sqrt(sum(x * x for x in vec.values()))
    return vec, norm


def build_retrieval_index(
    train_segments, fold_index: int = -1, fallback: str = DEFAULT_CONSTANT_CAPTION
) -> RetrievalIndex:
    """Index the training captions: idf(w) = ln(N / df(w)) over captions."""
    captions = [seg.caption.tokens for seg in train_segments]
    if not captions:
        raise ValidationError("build_retrieval_index needs at least one caption")
    df = Counter()
    for cap in captions:
        df.update(set(cap))
    n = len(captions)
    idf = {w: math.log(n / d) for w, d in df.items()}
    vectors = []
    norms = []
    for cap in captions:
        vec, norm = _tfidf_vector(cap, idf)
        vectors.append(vec)
        norms.append(norm)
    return RetrievalIndex(
        idf=idf,
        captions=tuple(captions),
        vectors=tuple(vectors),
        norms=tuple(norms),
        trained_on=fold_index,
        fallback=constant_caption_tokens(fallback),
    )


def predict_ret(index: RetrievalIndex, segment: Segment) -> TokenSequence:
    """Return the training caption with maximal cosine similarity to the
    segment's ASR tf-idf vector.

    Ties break toward the lowest training-caption ordinal; a zero-norm query
    (or all-zero candidates) falls back to the constant caption.
    """
    query, qnorm = _tfidf_vector(segment.asr.tokens, index.idf)
    best_idx = -1
    best_cos = 0.0
    if qnorm > 0:
        for i, (vec, norm) in enumerate(zip(index.vectors, index.norms)):
            if norm == 0:
                continue
            dot = sum(w * vec.get(g, 0.0) for g, w in query.items())
            cos = dot / (qnorm * norm)
            if cos > best_cos:
                best_cos = cos
                best_idx = i
    if best_idx < 0:
        return TokenSequence(index.fallback, "generated")
    return TokenSequence(index.captions[best_idx], "generated")


# ---------------------------------------------------------------------------
# oracle object detector
# ---------------------------------------------------------------------------

_IRREGULAR_PLURALS = {
    "knives": "knife",
    "loaves": "loaf",
    "leaves": "leaf",
    "halves": "half",
    "shelves": "shelf",
    "children": "child",
}


def normalize_morphology(word: str) -> str:
    """Strip plural endings: irregular table, then -ies/-es/-s rules."""
    if word in _IRREGULAR_PLURALS:
        return _IRREGULAR_PLURALS[word]
    if len(word) > 3 and word.endswith("ies"):
        return word[:-3] + "y"
    if len(word) > 3 and word.endswith("es"):
        stem = word[:-2]
        if stem.endswith(("s", "x", "z", "ch", "sh", "o")):
            return stem  # dishes -> dish, boxes -> box, tomatoes -> tomato
        return word[:-1]  # slices -> slice
    if len(word) > 2 and word.endswith("s") and not word.endswith("ss"):
        return word[:-1]
    return word


@dataclass(frozen=True)
class OracleDetector:
    """A perfect-precision detector over a fixed label set, ranked by
    training ground-truth frequency."""

    labels: tuple[str, ...]
    frequency_rank: tuple[str, ...]

    def __post_init__(self):
        normalized = [normalize_morphology(label) for label in self.labels]
        if len(set(normalized)) != len(normalized):
            raise ValidationError("oracle labels collide after normalization")


def build_oracle_detector(labels, train_segments) -> OracleDetector:
    """Rank the labels by how often they match training captions."""
    labels = tuple(dict.fromkeys(labels))
    if not labels:
        raise ValidationError("oracle detector needs at least one label")
    by_norm = {normalize_morphology(label): label for label in labels}
    counts = Counter()
    for seg in train_segments:
        seen = {normalize_morphology(t) for t in seg.caption.tokens}
        for norm in seen:
            if norm in by_norm:
                counts[by_norm[norm]] += 1
    rank = sorted(labels, key=lambda w: (-counts[w], w))
    return OracleDetector(labels=labels, frequency_rank=tuple(rank))


def detect_oracle_objects(
    detector: OracleDetector, segment: Segment, fraction: float = 1.0
) -> set[str]:
    """Labels (from the top-ceil(fraction * |labels|) most frequent) whose
    normalized form matches a normalized ground-truth caption token."""
    if not 0 < fraction <= 1:
        raise ValidationError("fraction must be in (0, 1]")
    top_k = math.ceil(fraction * len(detector.frequency_rank))
    active = detector.frequency_rank[:top_k]
    caption_norms = {normalize_morphology(t) for t in segment.caption.tokens}
    return {label for label in active if normalize_morphology(label) in caption_norms}
