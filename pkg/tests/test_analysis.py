"""DAN classifiers, per-word AUC records, stated rate, complementarity report."""

import numpy as np
import pytest

from stepcap.analysis import (
    ComplementarityReport,
    DanHyperParams,
    WordAucRecord,
    caption_unigram_targets,
    complementarity_report,
    fold_word_aucs,
    stated_rate,
    train_dan,
    word_aucs,
)
from stepcap.corpus import (
    FrameFeatureSet,
    Segment,
    TokenSequence,
    build_vocabulary,
    generate_synthetic_corpus,
    preprocess,
    tiny_preset,
)
from stepcap.errors import ValidationError


def seg(seg_id, caption, asr=(), frames=None):
    return Segment(
        segment_id=seg_id,
        start_s=0.0,
        end_s=10.0,
        caption=TokenSequence.from_tokens(caption, "caption"),
        asr=TokenSequence.from_tokens(asr, "asr"),
        frames=frames if frames is not None else FrameFeatureSet.empty(0),
    )


class TestSoftTargets:
    def test_equal_mass_over_caption_words(self):
        vocab = build_vocabulary([seg("v", ["add", "the", "oil"] * 2)], min_count=1)
        prepared = [preprocess(seg("s", ["add", "the", "oil"]), vocab)]
        targets, weights = caption_unigram_targets(prepared, vocab)
        assert weights[0] == 1.0
        for word in ("add", "the", "oil"):
            assert targets[0, vocab.id_of(word)] == pytest.approx(1 / 3)
        assert targets[0].sum() == pytest.approx(1.0)

    def test_all_oov_caption_skipped(self):
        vocab = build_vocabulary([seg("v", ["add", "oil"] * 3)], min_count=1)
        prepared = [preprocess(seg("s", ["zzz", "qqq"]), vocab)]
        targets, weights = caption_unigram_targets(prepared, vocab)
        assert weights[0] == 0.0
        assert targets[0].sum() == 0.0

    def test_repeated_word_mass(self):
        vocab = build_vocabulary([seg("v", ["mix", "mix", "bowl"] * 2)], min_count=1)
        prepared = [preprocess(seg("s", ["mix", "mix", "bowl"]), vocab)]
        targets, _ = caption_unigram_targets(prepared, vocab)
        assert targets[0, vocab.id_of("mix")] == pytest.approx(2 / 3)


class TestStatedRate:
    def test_fixture_three_of_four(self):
        segments = [
            seg("a", ["pan", "x"], ["pan"]),
            seg("b", ["pan", "x"], ["pan"]),
            seg("c", ["pan", "x"], ["pan"]),
            seg("d", ["pan", "x"], []),
            seg("e", ["other"], ["pan"]),  # pan not in GT: ignored
        ]
        assert stated_rate("pan", segments) == pytest.approx(0.75)

    def test_always_spoken(self):
        segments = [seg(str(i), ["oil"], ["oil", "um"]) for i in range(3)]
        assert stated_rate("oil", segments) == 1.0

    def test_never_in_gt_errors(self):
        with pytest.raises(ValidationError):
            stated_rate("zzz", [seg("a", ["oil"], ["zzz"])])


class TestWordAucRecord:
    def test_derived_fields_validated(self):
        WordAucRecord("beer", 98.0, 68.0, 83.0, 30.0, 0.9, 5)
        with pytest.raises(ValidationError):
            WordAucRecord("beer", 98.0, 68.0, 80.0, 30.0, 0.9, 5)
        with pytest.raises(ValidationError):
            WordAucRecord("beer", 98.0, 68.0, 83.0, 20.0, 0.9, 5)

    def test_swap_negates_delta_preserves_mu(self):
        fold = {"pan": (90.0, 60.0, 8), "oil": (70.0, 80.0, 6)}
        swapped = {w: (v, t, f) for w, (t, v, f) in fold.items()}
        segments = [seg("a", ["pan", "oil"], ["pan", "oil"])]
        records = {r.word: r for r in word_aucs([fold], segments)}
        records_swapped = {r.word: r for r in word_aucs([swapped], segments)}
        for word in records:
            assert records_swapped[word].auc_delta == -records[word].auc_delta
            assert records_swapped[word].auc_mu == records[word].auc_mu


class TestDanTraining:
    def test_loss_decreases_on_synthetic(self):
        corpus = generate_synthetic_corpus(tiny_preset(), seed=31)
        segments = corpus.segments()
        vocab = build_vocabulary(segments, min_count=2)
        prepared = [preprocess(s, vocab) for s in segments]
        from stepcap.neural import autodiff as ad
        from stepcap.analysis import DanClassifier

        hp = DanHyperParams(hidden_dim=32, seed=5)
        targets, weights = caption_unigram_targets(prepared, vocab)

        def mean_loss(clf):
            logits = clf._logits(prepared)
            return ad.soft_cross_entropy(logits, targets, weights).item()

        fresh = DanClassifier("asr", vocab, corpus.feature_dim, hp)
        before = mean_loss(fresh)
        trained = train_dan(prepared, "asr", vocab, corpus.feature_dim, hp)
        after = mean_loss(trained)
        assert after <= 0.7 * before

    def test_video_dan_trains_and_predicts(self):
        corpus = generate_synthetic_corpus(tiny_preset(), seed=37)
        segments = corpus.segments()
        vocab = build_vocabulary(segments, min_count=2)
        prepared = [preprocess(s, vocab) for s in segments]
        hp = DanHyperParams(hidden_dim=32, train_steps=60, seed=2)
        clf = train_dan(prepared, "video", vocab, corpus.feature_dim, hp)
        probs = clf.predict_proba(prepared[:5])
        assert probs.shape == (5, len(vocab))
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-8)

    def test_empty_input_featurizes_to_zero(self):
        vocab = build_vocabulary([seg("v", ["add", "oil"] * 3)], min_count=1)
        hp = DanHyperParams(hidden_dim=8, seed=0)
        from stepcap.analysis import DanClassifier

        clf = DanClassifier("asr", vocab, 0, hp)
        prepared = [preprocess(seg("s", ["add"], []), vocab)]
        feats = clf._asr_embedding_mean(prepared)
        assert np.allclose(feats.data, 0.0)

    def test_deterministic(self):
        corpus = generate_synthetic_corpus(tiny_preset(), seed=41)
        segments = corpus.segments()[:30]
        vocab = build_vocabulary(segments, min_count=1)
        prepared = [preprocess(s, vocab) for s in segments]
        hp = DanHyperParams(hidden_dim=16, train_steps=30, seed=9)
        a = train_dan(prepared, "video", vocab, corpus.feature_dim, hp)
        b = train_dan(prepared, "video", vocab, corpus.feature_dim, hp)
        for name in a.params:
            assert np.array_equal(a.params[name].data, b.params[name].data)


class TestFoldWordAucs:
    def test_single_class_words_excluded(self):
        corpus = generate_synthetic_corpus(tiny_preset(), seed=43)
        segments = corpus.segments()
        vocab = build_vocabulary(segments, min_count=1)
        prepared = [preprocess(s, vocab) for s in segments]
        hp = DanHyperParams(hidden_dim=16, train_steps=20, seed=3)
        clf_t = train_dan(prepared, "asr", vocab, corpus.feature_dim, hp)
        clf_v = train_dan(prepared, "video", vocab, corpus.feature_dim, hp)
        result = fold_word_aucs(clf_t, clf_v, prepared, min_freq=1)
        assert "the" not in result  # present in every caption: single class
        assert len(result) >= 10


class TestComplementarityReport:
    def make_records(self, deltas_and_rates):
        records = []
        for i, (delta, rate) in enumerate(deltas_and_rates):
            auc_t = 60.0 + delta / 2
            auc_v = 60.0 - delta / 2
            records.append(
                WordAucRecord(
                    word=f"w{i:02d}",
                    auc_t=auc_t,
                    auc_v=auc_v,
                    auc_mu=(auc_t + auc_v) / 2,
                    auc_delta=auc_t - auc_v,
                    stated_rate=rate,
                    gt_segment_freq=10 + i,
                )
            )
        return records

    def test_tables_and_correlations(self):
        records = self.make_records(
            [(-20, 0.0), (-10, 0.1), (0, 0.4), (10, 0.7), (20, 0.9), (5, 0.5)]
        )
        report = complementarity_report(records, top_k=3)
        assert isinstance(report, ComplementarityReport)
        assert report.asr_better[0].auc_delta == pytest.approx(20.0)
        assert report.video_better[0].auc_delta == pytest.approx(-20.0)
        assert report.stated_rate_rho > 0.9
        assert report.stated_rate_p < 0.05
        payload = report.as_dict()
        assert payload["num_words"] == 6

    def test_all_equal_deltas(self):
        records = self.make_records([(0, 0.2), (0, 0.5), (0, 0.8), (0, 0.1)])
        with pytest.raises(ValidationError):
            # constant auc_delta: spearman undefined
            complementarity_report(records)

    def test_too_few_records(self):
        with pytest.raises(ValidationError):
            complementarity_report(self.make_records([(1, 0.5), (2, 0.6)]))
