"""CLI commands, config validation, artifact formats, determinism."""

import json
from dataclasses import replace

import pytest

from stepcap.cli import main
from stepcap.cli.config import config_from_dict, load_config
from stepcap.cli.runner import load_labels, run_analysis, run_experiment
from stepcap.corpus import SynthSpec, emit, generate_synthetic_corpus
from stepcap.errors import ConfigError


def small_spec():
    return SynthSpec(
        actions=("chop", "stir", "heat"),
        ingredients=("onion", "carrot", "tomato", "garlic"),
        cookware=("skillet", "wok"),
        modifiers=("fresh", "diced"),
        synonyms={"garlic": "cloves"},
        num_videos=14,
        segments_per_video=4,
        feature_dim=12,
        frames_min=3,
        frames_max=5,
        cookware_weights=(0.7, 0.3),
    )


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    spec = small_spec()
    corpus = generate_synthetic_corpus(spec, seed=3)
    emit(corpus, out / "corpus.jsonl", out / "features")
    (out / "labels.txt").write_text("\n".join(spec.object_words()) + "\n")
    return out


def base_config(corpus_dir, out_dir, **extra):
    raw = {
        "corpus": str(corpus_dir / "corpus.jsonl"),
        "features_dir": str(corpus_dir / "features"),
        "output_dir": str(out_dir),
        "splits": {"J": 2, "seed": 5},
        "seed": 2,
        "systems": ["cnst", "asc"],
        "profile": "desk",
        "vocab_min_count": 2,
        "hparams": {"train_steps": 12, "d_model": 16, "batch_size": 8, "n_heads": 2},
        "grid": {"d_model": [16], "n_layers": [2], "lambda_reg": [0.0005]},
        "oracle": {"labels": str(corpus_dir / "labels.txt")},
        "analysis": {"min_word_freq": 1, "dan": {"hidden_dim": 16, "train_steps": 40}},
        "significance": {"pairing": "segments"},
    }
    raw.update(extra)
    return raw


class TestConfig:
    def test_missing_corpus_path_is_config_error(self, tmp_path):
        raw = {"corpus": str(tmp_path / "nope.jsonl"), "output_dir": str(tmp_path)}
        config = config_from_dict(raw)
        with pytest.raises(ConfigError, match="nope.jsonl"):
            config.validate()

    def test_unknown_system_rejected(self, tmp_path):
        config = config_from_dict(
            {"corpus": "x", "output_dir": "y", "systems": ["warp-drive"]}
        )
        with pytest.raises(ConfigError, match="warp-drive"):
            config.validate(check_paths=False)

    def test_oracle_system_needs_labels(self, tmp_path):
        config = config_from_dict(
            {"corpus": "x", "output_dir": "y", "systems": ["at+oracle"]}
        )
        with pytest.raises(ConfigError, match="label"):
            config.validate(check_paths=False)

    def test_no_systems_rejected(self):
        config = config_from_dict({"corpus": "x", "output_dir": "y", "systems": []})
        with pytest.raises(ConfigError):
            config.validate(check_paths=False)

    def test_load_config_applies_overrides(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"corpus": "a", "output_dir": "b", "seed": 1}))
        config = load_config(path, {"seed": 9})
        assert config.seed == 9

    def test_bad_json_is_config_error(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{nope")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_load_labels_dedupes(self, tmp_path):
        path = tmp_path / "labels.txt"
        path.write_text("# objects\npan\noil\npan\n\n")
        assert load_labels(path) == ("pan", "oil")


class TestRunCommand:
    def test_missing_corpus_exits_2(self, tmp_path, capsys):
        config_path = tmp_path / "c.json"
        config_path.write_text(
            json.dumps({"corpus": str(tmp_path / "missing.jsonl"),
                        "output_dir": str(tmp_path / "out")})
        )
        code = main(["run", "--config", str(config_path)])
        assert code == 2
        assert "missing.jsonl" in capsys.readouterr().err

    def test_dry_run_validates_without_computing(self, corpus_dir, tmp_path, capsys):
        config_path = tmp_path / "c.json"
        config_path.write_text(json.dumps(base_config(corpus_dir, tmp_path / "out")))
        code = main(["run", "--config", str(config_path), "--dry-run"])
        assert code == 0
        assert "plan" in capsys.readouterr().out
        assert not (tmp_path / "out").exists() or not any((tmp_path / "out").iterdir())

    def test_cnst_only_touches_no_neural_code(self, corpus_dir, tmp_path, monkeypatch):
        import stepcap.cli.runner as runner

        def boom(*args, **kwargs):
            raise AssertionError("neural path touched")

        monkeypatch.setattr(runner, "grid_search", boom)
        raw = base_config(corpus_dir, tmp_path / "out", systems=["cnst"])
        result = run_experiment(config_from_dict(raw))
        assert ("cnst", 0) in result.cells

    def test_run_emits_artifacts_and_formats(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        raw = base_config(corpus_dir, out, systems=["cnst", "asc", "at"])
        result = run_experiment(config_from_dict(raw))
        assert (out / "summary.json").is_file()
        assert (out / "splits.json").is_file()
        assert (out / "significance.json").is_file()
        assert (out / "diversity.json").is_file()
        assert (out / "checkpoints" / "at_fold0.cfck").is_file()
        # predictions JSONL schema
        lines = (out / "predictions" / "cnst_fold0.jsonl").read_text().splitlines()
        first = json.loads(lines[0])
        assert set(first) == {"segment_id", "system", "tokens"}
        assert first["system"] == "cnst"
        assert isinstance(first["tokens"], list)
        # summary structure
        summary = json.loads((out / "summary.json").read_text())
        assert set(summary["systems"]) == {"cnst", "asc", "at"}
        for metrics in summary["systems"].values():
            assert set(metrics) == {"bleu4", "meteor", "rouge_l", "cider", "diversity"}
        # significance pairs cover all unordered system pairs
        significance = json.loads((out / "significance.json").read_text())
        assert {e["metric"] for e in significance} == {
            "bleu4", "meteor", "rouge_l", "cider"
        }
        assert len(significance[0]["pairs"]) == 3
        assert result.summary == summary

    def test_rerun_byte_identical(self, corpus_dir, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for out in (out_a, out_b):
            raw = base_config(corpus_dir, out, systems=["cnst", "ret", "at"])
            run_experiment(config_from_dict(raw))
        for rel in sorted(p.relative_to(out_a) for p in out_a.rglob("*") if p.is_file()):
            assert (out_a / rel).read_bytes() == (out_b / rel).read_bytes(), rel

    def test_jobs_pool_matches_sequential(self, corpus_dir, tmp_path):
        out_a = tmp_path / "seq"
        out_b = tmp_path / "pool"
        raw_a = base_config(corpus_dir, out_a, systems=["cnst", "fasc"])
        raw_b = base_config(corpus_dir, out_b, systems=["cnst", "fasc"])
        run_experiment(config_from_dict(raw_a), jobs=1)
        run_experiment(config_from_dict(raw_b), jobs=2)
        summary_a = (out_a / "summary.json").read_text()
        summary_b = (out_b / "summary.json").read_text()
        assert summary_a == summary_b

    def test_per_segment_csv_emitted_when_requested(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        raw = base_config(corpus_dir, out, systems=["cnst"], per_segment_csv=True)
        run_experiment(config_from_dict(raw))
        csv_path = out / "per_segment" / "cnst_fold0.csv"
        assert csv_path.is_file()
        header = csv_path.read_text().splitlines()[0]
        assert header == "segment_id,metric,value"


class TestSynthCommand:
    def test_synth_writes_corpus(self, tmp_path):
        code = main(["synth", "--preset", "tiny", "--out", str(tmp_path / "s"),
                     "--seed", "4"])
        assert code == 0
        assert (tmp_path / "s" / "corpus.jsonl").is_file()
        assert (tmp_path / "s" / "labels.txt").is_file()
        assert (tmp_path / "s" / "synthspec.json").is_file()

    def test_synth_deterministic(self, tmp_path):
        main(["synth", "--preset", "tiny", "--out", str(tmp_path / "x"), "--seed", "4"])
        main(["synth", "--preset", "tiny", "--out", str(tmp_path / "y"), "--seed", "4"])
        assert (tmp_path / "x" / "corpus.jsonl").read_bytes() == (
            tmp_path / "y" / "corpus.jsonl"
        ).read_bytes()


class TestReportCommand:
    def test_empty_dir_is_actionable_error(self, tmp_path, capsys):
        code = main(["report", "--output-dir", str(tmp_path)])
        assert code == 2
        err = capsys.readouterr().err
        assert "stepcap run" in err

    def test_report_after_run(self, corpus_dir, tmp_path, capsys):
        out = tmp_path / "out"
        raw = base_config(corpus_dir, out, systems=["cnst", "asc"])
        run_experiment(config_from_dict(raw))
        code = main(["report", "--output-dir", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "Main results" in text
        assert "| cnst" in text
        assert (out / "report.md").is_file()


class TestAnalyzeCommand:
    def test_analysis_emits_csv_and_report(self, corpus_dir, tmp_path):
        out = tmp_path / "out"
        raw = base_config(corpus_dir, out)
        payload = run_analysis(config_from_dict(raw))
        assert payload["num_words"] >= 5
        csv_lines = (out / "word_aucs.csv").read_text().splitlines()
        assert csv_lines[0] == "word,auc_t,auc_v,auc_mu,auc_delta,stated_rate,freq"
        assert len(csv_lines) == payload["num_words"] + 1
        assert (out / "complementarity.json").is_file()

    def test_threshold_excluding_all_words_errors(self, corpus_dir, tmp_path):
        from stepcap.errors import ValidationError

        raw = base_config(corpus_dir, tmp_path / "out")
        raw["analysis"]["min_word_freq"] = 10_000
        with pytest.raises(ValidationError, match="threshold"):
            run_analysis(config_from_dict(raw))


class TestStatsCommand:
    def test_stats_prints_json(self, corpus_dir, capsys):
        code = main(["stats", "--corpus", str(corpus_dir / "corpus.jsonl"),
                     "--features-dir", str(corpus_dir / "features")])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["num_segments"] == 56
