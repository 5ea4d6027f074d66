"""Per-word modality-complementarity analysis.

Two unimodal deep-averaging-network classifiers (ASR-token features vs
frame features) are trained per fold to predict the caption's unigram
distribution; per-word ROC AUCs of the two classifiers quantify which
modality predicts which word types, and the stated rate
P(word in ASR | word in caption) is correlated against their difference.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .corpus.preprocess import PreparedExample
from .corpus.vocab import RESERVED, Vocabulary
from .errors import TrainingDivergedError, ValidationError
from .neural import autodiff as ad
from .seeding import rng_for
from .stats import roc_auc, spearman

DAN_MODALITIES = ("asr", "video")


@dataclass(frozen=True)
class DanHyperParams:
    hidden_dim: int = 64
    lr: float = 3e-3
    batch_size: int = 32
    train_steps: int = 400
    seed: int = 0


class DanClassifier:
    """Two-hidden-layer residual deep averaging network with a softmax
    output over the fold vocabulary.

    The ASR variant averages learned token embeddings over the segment's
    ASR ids; the video variant averages the raw frame feature rows. An
    empty input featurizes to the zero vector.
    """

    def __init__(
        self,
        modality: str,
        vocab: Vocabulary,
        feature_dim: int,
        hparams: DanHyperParams,
    ):
        if modality not in DAN_MODALITIES:
            raise ValidationError(f"unknown DAN modality {modality!r}")
        if modality == "video" and feature_dim <= 0:
            raise ValidationError("video DAN requires a positive feature_dim")
        self.modality = modality
        self.vocab = vocab
        self.feature_dim = feature_dim
        self.hparams = hparams
        h = hparams.hidden_dim
        in_dim = h if modality == "asr" else feature_dim
        self.params: dict[str, ad.Tensor] = {}

        def add(name, shape, scale):
            rng = rng_for("dan-param", hparams.seed, modality, name)
            self.params[name] = ad.parameter(rng.normal(0.0, scale, size=shape))

        if modality == "asr":
            add("token_emb", (len(vocab), h), 0.1)
        add("w_in", (in_dim, h), 1.0 / np.sqrt(in_dim))
        self.params["b_in"] = ad.parameter(np.zeros(h))
        for i in (1, 2):
            add(f"w{i}", (h, h), 1.0 / np.sqrt(h))
            self.params[f"b{i}"] = ad.parameter(np.zeros(h))
        add("w_out", (h, len(vocab)), 0.02)
        self.params["b_out"] = ad.parameter(np.zeros(len(vocab)))

    # -- featurization -------------------------------------------------------

    def _featurize_video(self, examples: list[PreparedExample]) -> np.ndarray:
        feats = np.zeros((len(examples), self.feature_dim))
        for i, ex in enumerate(examples):
            mat = ex.segment.frames.matrix
            if mat.shape[0] > 0:
                feats[i] = mat.astype(np.float64).mean(axis=0)
        return feats

    def _asr_embedding_mean(self, examples: list[PreparedExample]) -> ad.Tensor:
        max_len = max(1, max(len(ex.input_ids) for ex in examples))
        ids = np.zeros((len(examples), max_len), dtype=np.int64)
        weights = np.zeros((len(examples), max_len))
        for i, ex in enumerate(examples):
            n = len(ex.input_ids)
            if n:
                ids[i, :n] = ex.input_ids
                weights[i, :n] = 1.0 / n
        emb = ad.embedding(self.params["token_emb"], ids)
        return (emb * ad.Tensor(weights[:, :, None])).sum(axis=1)

    def _logits(self, examples: list[PreparedExample]) -> ad.Tensor:
        p = self.params
        if self.modality == "asr":
            x = self._asr_embedding_mean(examples)
        else:
            x = ad.Tensor(self._featurize_video(examples))
        h = (x @ p["w_in"] + p["b_in"]).relu()
        h = h + (h @ p["w1"] + p["b1"]).relu()
        h = h + (h @ p["w2"] + p["b2"]).relu()
        return h @ p["w_out"] + p["b_out"]

    def predict_proba(self, examples: list[PreparedExample]) -> np.ndarray:
        """Softmax word probabilities, one row per segment."""
        logits = self._logits(examples).data
        shifted = logits - logits.max(axis=-1, keepdims=True)
        expd = np.exp(shifted)
        return expd / expd.sum(axis=-1, keepdims=True)


def caption_unigram_targets(
    examples: list[PreparedExample], vocab: Vocabulary
) -> tuple[np.ndarray, np.ndarray]:
    """Soft targets: in-vocab caption unigram frequencies, renormalized.

    All-OOV captions get row weight 0 and are skipped in training.
    """
    targets = np.zeros((len(examples), len(vocab)))
    weights = np.zeros(len(examples))
    n_reserved = len(RESERVED)
    for i, ex in enumerate(examples):
        counts = Counter(
            vocab.id_of(t) for t in ex.segment.caption.tokens if t in vocab
        )
        total = sum(counts.values())
        if total == 0:
            continue
        for idx, c in counts.items():
            if idx >= n_reserved:
                targets[i, idx] = c / total
        if targets[i].sum() > 0:
            targets[i] /= targets[i].sum()
            weights[i] = 1.0
    return targets, weights


def train_dan(
    examples: list[PreparedExample],
    modality: str,
    vocab: Vocabulary,
    feature_dim: int,
    hparams: DanHyperParams | None = None,
) -> DanClassifier:
    """Train a unimodal DAN against soft caption-unigram targets with Adam.

    Deterministic per hparams.seed; aborts on divergence.
    """
    from .neural.training import (
        DIVERGENCE_FACTOR,
        DIVERGENCE_PATIENCE,
        Adam,
    )

    if not examples:
        raise ValidationError("train_dan needs at least one example")
    hparams = hparams or DanHyperParams()
    clf = DanClassifier(modality, vocab, feature_dim, hparams)
    targets, weights = caption_unigram_targets(examples, vocab)
    usable = np.flatnonzero(weights > 0)
    if usable.size == 0:
        raise ValidationError("every caption is out-of-vocabulary")
    optimizer = Adam(clf.params, lr=hparams.lr)
    rng = rng_for("dan-batches", hparams.seed, modality)
    initial = None
    bad = 0
    for _step in range(hparams.train_steps):
        size = min(hparams.batch_size, usable.size)
        picks = usable[rng.choice(usable.size, size=size, replace=False)]
        batch = [examples[i] for i in picks]
        optimizer.zero_grad()
        logits = clf._logits(batch)
        loss = ad.soft_cross_entropy(logits, targets[picks], weights[picks])
        loss.backward()
        optimizer.step()
        value = loss.item()
        if initial is None:
            initial = value
        if value > DIVERGENCE_FACTOR * initial:
            bad += 1
            if bad >= DIVERGENCE_PATIENCE:
                raise TrainingDivergedError(
                    f"DAN loss {value:.3f} diverged from initial {initial:.3f}"
                )
        else:
            bad = 0
    return clf


# ---------------------------------------------------------------------------
# per-word AUC records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WordAucRecord:
    """Per-word-type AUCs (percent scale) with stated rate and frequency."""

    word: str
    auc_t: float
    auc_v: float
    auc_mu: float
    auc_delta: float
    stated_rate: float | None
    gt_segment_freq: int

    def __post_init__(self):
        if self.auc_mu != (self.auc_t + self.auc_v) / 2.0:
            raise ValidationError("auc_mu must equal (auc_t + auc_v)/2")
        if self.auc_delta != self.auc_t - self.auc_v:
            raise ValidationError("auc_delta must equal auc_t - auc_v")

    def as_row(self) -> dict:
        return {
            "word": self.word,
            "auc_t": self.auc_t,
            "auc_v": self.auc_v,
            "auc_mu": self.auc_mu,
            "auc_delta": self.auc_delta,
            "stated_rate": self.stated_rate,
            "gt_segment_freq": self.gt_segment_freq,
        }


def stated_rate(word: str, segments) -> float:
    """P(word in ASR | word in ground-truth caption) over the segments."""
    in_gt = 0
    in_both = 0
    for seg in segments:
        if word in seg.caption.tokens:
            in_gt += 1
            if word in seg.asr.tokens:
                in_both += 1
    if in_gt == 0:
        raise ValidationError(f"stated rate undefined: {word!r} never in a caption")
    return in_both / in_gt


def fold_word_aucs(
    classifier_t: DanClassifier,
    classifier_v: DanClassifier,
    test_examples: list[PreparedExample],
    min_freq: int = 5,
) -> dict[str, tuple[float, float, int]]:
    """One fold's per-word (auc_t, auc_v, freq); single-class words skipped."""
    vocab = classifier_t.vocab
    probs_t = classifier_t.predict_proba(test_examples)
    probs_v = classifier_v.predict_proba(test_examples)
    caption_sets = [set(ex.segment.caption.tokens) for ex in test_examples]
    out: dict[str, tuple[float, float, int]] = {}
    for word in vocab.words():
        labels = np.array([1 if word in caps else 0 for caps in caption_sets])
        freq = int(labels.sum())
        if freq < min_freq or freq == len(labels):
            continue
        idx = vocab.id_of(word)
        out[word] = (
            roc_auc(probs_t[:, idx], labels),
            roc_auc(probs_v[:, idx], labels),
            freq,
        )
    return out


def word_aucs(
    per_fold: list[dict[str, tuple[float, float, int]]],
    all_segments,
    min_folds: int = 1,
) -> list[WordAucRecord]:
    """Average per-fold AUCs into records; stated rate over all_segments."""
    acc: dict[str, list[tuple[float, float, int]]] = defaultdict(list)
    for fold_result in per_fold:
        for word, entry in fold_result.items():
            acc[word].append(entry)
    records = []
    for word in sorted(acc):
        entries = acc[word]
        if len(entries) < min_folds:
            continue
        auc_t = float(np.mean([e[0] for e in entries]))
        auc_v = float(np.mean([e[1] for e in entries]))
        freq = int(sum(e[2] for e in entries))
        try:
            rate = stated_rate(word, all_segments)
        except ValidationError:
            rate = None
        records.append(
            WordAucRecord(
                word=word,
                auc_t=auc_t,
                auc_v=auc_v,
                auc_mu=(auc_t + auc_v) / 2.0,
                auc_delta=auc_t - auc_v,
                stated_rate=rate,
                gt_segment_freq=freq,
            )
        )
    return records


@dataclass(frozen=True)
class ComplementarityReport:
    """Scatter data, the four top-k tables, and the two rank correlations."""

    records: tuple[WordAucRecord, ...]
    easiest: tuple[WordAucRecord, ...]
    hardest: tuple[WordAucRecord, ...]
    asr_better: tuple[WordAucRecord, ...]
    video_better: tuple[WordAucRecord, ...]
    stated_rate_rho: float
    stated_rate_p: float
    freq_rho: float
    freq_p: float

    def as_dict(self) -> dict:
        def table(rows):
            return [
                {"word": r.word, "auc_mu": r.auc_mu, "auc_delta": r.auc_delta}
                for r in rows
            ]

        return {
            "num_words": len(self.records),
            "easiest": table(self.easiest),
            "hardest": table(self.hardest),
            "asr_better": table(self.asr_better),
            "video_better": table(self.video_better),
            "spearman_stated_rate_vs_auc_delta": {
                "rho": self.stated_rate_rho,
                "p": self.stated_rate_p,
            },
            "spearman_freq_vs_auc_delta": {"rho": self.freq_rho, "p": self.freq_p},
        }


def complementarity_report(
    records: list[WordAucRecord], top_k: int = 10
) -> ComplementarityReport:
    """Assemble the scatter/table/correlation report from word records."""
    with_rate = [r for r in records if r.stated_rate is not None]
    if len(with_rate) < 3:
        raise ValidationError("need at least 3 records with a stated rate")
    srho, sp = spearman(
        [r.stated_rate for r in with_rate], [r.auc_delta for r in with_rate]
    )
    frho, fp = spearman(
        [r.gt_segment_freq for r in with_rate], [r.auc_delta for r in with_rate]
    )
    by_mu = sorted(records, key=lambda r: (-r.auc_mu, r.word))
    by_delta = sorted(records, key=lambda r: (-r.auc_delta, r.word))
    return ComplementarityReport(
        records=tuple(records),
        easiest=tuple(by_mu[:top_k]),
        hardest=tuple(reversed(by_mu[-top_k:])),
        asr_better=tuple(by_delta[:top_k]),
        video_better=tuple(reversed(by_delta[-top_k:])),
        stated_rate_rho=srho,
        stated_rate_p=sp,
        freq_rho=frho,
        freq_p=fp,
    )
