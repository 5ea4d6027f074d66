"""Corpus data model, ingestion, statistics, vocabulary, folds, preprocessing."""

import json

import numpy as np
import pytest

from stepcap.corpus import (
    Corpus,
    FrameFeatureSet,
    Segment,
    TokenSequence,
    Video,
    acceptance_preset,
    build_vocabulary,
    compute_stats,
    emit,
    generate_synthetic_corpus,
    ingest,
    make_folds,
    preprocess,
    tiny_preset,
    tokenize,
    write_features,
)
from stepcap.corpus.vocab import BOS, EOS, UNK
from stepcap.errors import ParseError, ValidationError


def seg(seg_id, caption, asr=(), start=0.0, end=10.0, frames=None):
    return Segment(
        segment_id=seg_id,
        start_s=start,
        end_s=end,
        caption=TokenSequence.from_text(caption, "caption"),
        asr=TokenSequence.from_tokens(asr, "asr"),
        frames=frames if frames is not None else FrameFeatureSet.empty(0),
    )


def two_video_corpus():
    v1 = Video("vid_a", 60.0, (seg("a0", "add the oil", ["add", "oil"], 0, 20),
                               seg("a1", "stir the soup", ["stir"], 25, 50)))
    v2 = Video("vid_b", 40.0, (seg("b0", "heat the pan", [], 5, 30),))
    return Corpus((v1, v2))


class TestTokenize:
    def test_lowercase_and_punctuation_split(self):
        assert tokenize("Add the OIL, then stir.") == [
            "add", "the", "oil", ",", "then", "stir", "."
        ]

    def test_apostrophe_stays_internal(self):
        assert tokenize("don't stop") == ["don't", "stop"]

    def test_empty(self):
        assert tokenize("   ") == []


class TestIngest:
    def test_happy_path_two_videos(self, tmp_path):
        emit(two_video_corpus(), tmp_path / "corpus.jsonl")
        corpus = ingest(tmp_path / "corpus.jsonl")
        assert len(corpus) == 2
        assert corpus.video_ids() == ["vid_a", "vid_b"]
        assert len(corpus.segments()) == 3

    def test_round_trip_with_features(self, tmp_path):
        rng = np.random.default_rng(0)
        frames = FrameFeatureSet(rng.normal(size=(5, 8)).astype(np.float32))
        video = Video("v", 30.0, (seg("s0", "chop the onion", ["chop"], 0, 10, frames),))
        corpus = Corpus((video,), feature_dim=8)
        emit(corpus, tmp_path / "c.jsonl", tmp_path / "feat")
        again = ingest(tmp_path / "c.jsonl", tmp_path / "feat")
        assert again == corpus
        emit(again, tmp_path / "c2.jsonl", tmp_path / "feat2")
        assert (tmp_path / "c.jsonl").read_bytes() == (tmp_path / "c2.jsonl").read_bytes()

    def test_reversed_interval_names_segment(self):
        with pytest.raises(ValidationError, match="bad_seg"):
            seg("bad_seg", "x y", start=10.0, end=10.0)

    def test_feature_dim_mismatch(self, tmp_path):
        fdir = tmp_path / "feat"
        fdir.mkdir()
        write_features(fdir / "s0.cfwf", np.zeros((2, 8), dtype=np.float32))
        write_features(fdir / "s1.cfwf", np.zeros((2, 4), dtype=np.float32))
        records = [
            {
                "video_id": "v",
                "duration_s": 100.0,
                "segments": [
                    {"segment_id": "s0", "start_s": 0, "end_s": 10,
                     "caption": "a b", "asr": [], "features_ref": "s0.cfwf"},
                    {"segment_id": "s1", "start_s": 20, "end_s": 30,
                     "caption": "a b", "asr": [], "features_ref": "s1.cfwf"},
                ],
            }
        ]
        path = tmp_path / "c.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in records))
        with pytest.raises(ValidationError, match="dim"):
            ingest(path, fdir)

    def test_parse_error_names_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        good = json.dumps({"video_id": "v", "duration_s": 1.0, "segments": []})
        path.write_text(good + "\n{not json\n")
        with pytest.raises(ParseError, match="line 2"):
            ingest(path)

    def test_overlapping_segments_rejected(self):
        with pytest.raises(ValidationError, match="overlap"):
            Video("v", 60.0, (seg("s0", "a b", [], 0, 20), seg("s1", "a b", [], 10, 30)))

    def test_segment_outside_duration_rejected(self):
        with pytest.raises(ValidationError, match="outside"):
            Video("v", 15.0, (seg("s0", "a b", [], 0, 20),))

    def test_missing_feature_file(self, tmp_path):
        record = {
            "video_id": "v", "duration_s": 10.0,
            "segments": [{"segment_id": "s", "start_s": 0, "end_s": 5,
                          "caption": "a b", "asr": [], "features_ref": "nope.cfwf"}],
        }
        path = tmp_path / "c.jsonl"
        path.write_text(json.dumps(record))
        (tmp_path / "feat").mkdir()
        with pytest.raises(ValidationError, match="nope.cfwf"):
            ingest(path, tmp_path / "feat")


class TestStats:
    def test_wpm_hand_arithmetic(self):
        video = Video("v", 60.0, (seg("s", "a b", ["w"] * 60, 0.0, 30.0),))
        stats = compute_stats(Corpus((video,)))
        assert stats.wpm_mean == pytest.approx(120.0)

    def test_all_empty_asr(self):
        video = Video("v", 60.0, (seg("s0", "a b", [], 0, 10), seg("s1", "a b", [], 20, 30)))
        stats = compute_stats(Corpus((video,)))
        assert stats.zero_asr_fraction == 1.0
        assert stats.wpm_mean == 0.0

    def test_mean_median_42_28(self):
        video = Video("v", 200.0, (
            seg("s0", "a b", ["w"] * 42, 0, 60),
            seg("s1", "a b", ["w"] * 28, 70, 130),
        ))
        stats = compute_stats(Corpus((video,)))
        assert stats.asr_len_mean == pytest.approx(35.0)
        assert stats.asr_len_median == pytest.approx(35.0)

    def test_empty_corpus_errors(self):
        with pytest.raises(ValidationError):
            compute_stats(Corpus(()))


class TestVocabulary:
    def test_min_count_threshold(self):
        segments = [seg(f"s{i}", "add oil", [], i * 10, i * 10 + 5) for i in range(5)]
        segments += [seg(f"t{i}", "stir", [], 100 + i * 10, 105 + i * 10) for i in range(4)]
        vocab = build_vocabulary(segments, min_count=5)
        assert set(vocab.words()) == {"add", "oil"}
        assert len(vocab) == 6  # 4 reserved + 2

    def test_min_count_one_keeps_all_types(self):
        segments = [seg("s0", "add the oil"), seg("s1", "stir the soup", start=20, end=30)]
        vocab = build_vocabulary(segments, min_count=1)
        assert set(vocab.words()) == {"add", "the", "oil", "stir", "soup"}

    def test_empty_vocabulary_is_error(self):
        with pytest.raises(ValidationError, match="min_count"):
            build_vocabulary([seg("s0", "unique words only")], min_count=5)

    def test_monotonicity_raising_min_count_never_adds(self):
        corpus = generate_synthetic_corpus(tiny_preset(), seed=3)
        segments = corpus.segments()
        previous = None
        for mc in (1, 2, 3, 5, 8):
            words = set(build_vocabulary(segments, min_count=mc).words())
            if previous is not None:
                assert words <= previous
            previous = words

    def test_oov_maps_to_unk(self):
        vocab = build_vocabulary([seg("s0", "add oil add oil")], min_count=2)
        assert vocab.id_of("never-seen") == UNK


class TestFolds:
    def make_corpus(self, n):
        videos = tuple(
            Video(f"v{i:03d}", 20.0, (seg(f"v{i:03d}_s", "a b", [], 0, 10),))
            for i in range(n)
        )
        return Corpus(videos)

    def test_proportions_100_videos(self):
        folds = make_folds(self.make_corpus(100), J=10, seed=7)
        assert len(folds) == 10
        for f in folds:
            assert (len(f.train_ids), len(f.dev_ids), len(f.test_ids)) == (80, 10, 10)
            assert set(f.train_ids) | set(f.dev_ids) | set(f.test_ids) == set(
                self.make_corpus(100).video_ids()
            )

    def test_determinism(self):
        a = make_folds(self.make_corpus(50), J=4, seed=11)
        b = make_folds(self.make_corpus(50), J=4, seed=11)
        assert a == b
        c = make_folds(self.make_corpus(50), J=4, seed=12)
        assert a != c

    def test_rounding_toward_train(self):
        folds = make_folds(self.make_corpus(10), J=1, seed=0)
        f = folds[0]
        assert (len(f.train_ids), len(f.dev_ids), len(f.test_ids)) == (8, 1, 1)

    def test_too_few_videos(self):
        with pytest.raises(ValidationError):
            make_folds(self.make_corpus(2), J=1, seed=0)

    def test_pure_function_of_ids(self):
        # same ids, different segment contents -> same folds
        c1 = self.make_corpus(30)
        videos = tuple(
            Video(v.video_id, 50.0, (seg(f"{v.video_id}_x", "c d", [], 1, 2),))
            for v in c1.videos
        )
        c2 = Corpus(videos)
        assert make_folds(c1, J=3, seed=5) == make_folds(c2, J=3, seed=5)


class TestPreprocess:
    def vocab(self):
        return build_vocabulary([seg("s", "add the oil add the oil")], min_count=1)

    def test_truncation_keeps_prefix(self):
        vocab = self.vocab()
        s = seg("s", "add the oil", ["add"] * 100)
        prepared = preprocess(s, vocab, max_input_tokens=80)
        assert len(prepared.input_ids) == 80
        assert prepared.input_ids == tuple([vocab.id_of("add")] * 80)

    def test_truncation_idempotent(self):
        vocab = self.vocab()
        s = seg("s", "add the oil", ["add", "oil"] * 60)
        once = preprocess(s, vocab, 80).input_ids
        assert once[:80] == once
        truncated_seg = seg(
            "s", "add the oil", [vocab.word_of(i) for i in once]
        )
        assert preprocess(truncated_seg, vocab, 80).input_ids == once

    def test_oov_to_unk_and_bos_eos(self):
        vocab = self.vocab()
        s = seg("s", "add the oil", ["zzz", "oil"])
        prepared = preprocess(s, vocab, 80)
        assert prepared.input_ids[0] == UNK
        assert prepared.target_ids[0] == BOS
        assert prepared.target_ids[-1] == EOS

    def test_empty_asr_is_legal(self):
        prepared = preprocess(seg("s", "add the oil", []), self.vocab(), 80)
        assert prepared.input_ids == ()
        assert len(prepared.target_ids) == 5  # BOS + 3 + EOS


class TestSynthetic:
    def test_segment_count(self):
        corpus = generate_synthetic_corpus(acceptance_preset(), seed=1)
        assert len(corpus.segments()) == 1000
        assert len(corpus) == 200

    def test_determinism(self, tmp_path):
        spec = tiny_preset()
        a = generate_synthetic_corpus(spec, seed=42)
        b = generate_synthetic_corpus(spec, seed=42)
        assert a == b
        emit(a, tmp_path / "a.jsonl", tmp_path / "fa")
        emit(b, tmp_path / "b.jsonl", tmp_path / "fb")
        assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

    def test_noise_free_limit_asr_is_caption_plus_fillers(self):
        from dataclasses import replace

        spec = replace(
            tiny_preset(), p_drop=0.0, p_synonym=0.0, unspoken=(), filler_rate=2.0
        )
        corpus = generate_synthetic_corpus(spec, seed=9)
        fillers = set(spec.fillers)
        for segment in corpus.segments():
            without_fillers = [t for t in segment.asr.tokens if t not in fillers]
            assert tuple(without_fillers) == segment.caption.tokens

    def test_never_spoken_cookware_stated_rate_zero(self):
        from stepcap.analysis import stated_rate

        spec = acceptance_preset()
        corpus = generate_synthetic_corpus(spec, seed=5)
        segments = corpus.segments()
        for word in spec.cookware:
            assert stated_rate(word, segments) == 0.0

    def test_empty_word_list_is_error(self):
        from stepcap.corpus import SynthSpec

        with pytest.raises(ValidationError):
            SynthSpec(actions=(), ingredients=("a",), cookware=("b",))

    def test_caption_recoverable_from_asr_union_frames(self):
        # every caption word is either spoken (sometimes) or visually encoded
        spec = acceptance_preset()
        visual = set(spec.visual_words)
        spoken = set(spec.actions) | set(spec.ingredients) | set(spec.modifiers) | {
            "the", "in"
        }
        for word in spec.unspoken:
            assert word in visual
        corpus = generate_synthetic_corpus(spec, seed=2)
        for segment in corpus.segments():
            for tok in segment.caption.tokens:
                assert tok in visual or tok in spoken
