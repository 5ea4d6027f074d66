"""Experiment orchestration: fold preparation, per-cell system runs,
aggregation, significance, oracle sweeps, and complementarity analysis.

Every cell (fold x system) is a pure function of (corpus files, config,
seeds), so cells can run sequentially or in a process pool with
byte-identical artifacts either way.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .. import baselines
from ..analysis import (
    DanHyperParams,
    complementarity_report,
    fold_word_aucs,
    train_dan,
    word_aucs,
)
from ..corpus import (
    Corpus,
    FoldSplit,
    build_vocabulary,
    ingest,
    make_folds,
    preprocess,
    save_splits,
)
from ..errors import ConfigError, ValidationError
from ..metrics import MetricReport, diversity, evaluate, rouge_l
from ..neural import FoldData, HyperParams, grid_search, save_checkpoint
from ..neural.profiles import PROFILES
from ..seeding import derive_seed
from ..stats import combined_significance
from .config import NEURAL_SYSTEMS, ExperimentConfig

METRICS = ("bleu4", "meteor", "rouge_l", "cider")


def load_labels(path: str | Path) -> tuple[str, ...]:
    """Read an oracle label file: one label per line, # comments allowed."""
    lines = Path(path).read_text("utf-8").splitlines()
    labels = [ln.strip().lower() for ln in lines if ln.strip() and not ln.startswith("#")]
    if not labels:
        raise ConfigError(f"oracle label file {path} is empty")
    return tuple(dict.fromkeys(labels))


@dataclass
class FoldPrep:
    """One fold's segments, vocabulary, prepared examples, oracle detections."""

    split: FoldSplit
    fold_data: FoldData
    train_segments: list
    dev_segments: list
    test_segments: list
    detector: baselines.OracleDetector | None


def segments_for(corpus: Corpus, video_ids) -> list:
    wanted = set(video_ids)
    return [s for v in corpus.videos if v.video_id in wanted for s in v.segments]


def prepare_fold(
    corpus: Corpus,
    split: FoldSplit,
    min_count: int,
    max_input_tokens: int,
    labels: tuple[str, ...] | None = None,
    oracle_fraction: float = 1.0,
) -> FoldPrep:
    train_segments = segments_for(corpus, split.train_ids)
    dev_segments = segments_for(corpus, split.dev_ids)
    test_segments = segments_for(corpus, split.test_ids)
    if not train_segments or not test_segments:
        raise ValidationError(f"fold {split.fold_index} has an empty train or test set")
    vocab = build_vocabulary(train_segments, min_count=min_count)
    prep = {
        part: tuple(preprocess(s, vocab, max_input_tokens) for s in segs)
        for part, segs in (
            ("train", train_segments), ("dev", dev_segments), ("test", test_segments),
        )
    }
    detector = None
    oracle_map: dict[str, tuple[str, ...]] = {}
    if labels:
        detector = baselines.build_oracle_detector(labels, train_segments)
        for seg in (*train_segments, *dev_segments, *test_segments):
            detected = baselines.detect_oracle_objects(detector, seg, oracle_fraction)
            oracle_map[seg.segment_id] = tuple(sorted(detected))
    fold_data = FoldData(
        fold_index=split.fold_index,
        vocab=vocab,
        train=prep["train"],
        dev=prep["dev"],
        test=prep["test"],
        feature_dim=corpus.feature_dim,
        oracle_labels=oracle_map,
    )
    return FoldPrep(
        split=split,
        fold_data=fold_data,
        train_segments=train_segments,
        dev_segments=dev_segments,
        test_segments=test_segments,
        detector=detector,
    )


def resolve_hparams(config: ExperimentConfig) -> tuple[HyperParams, dict]:
    base, grid = PROFILES[config.profile](seed=config.seed)
    if config.hparams_overrides:
        base = replace(base, **config.hparams_overrides)
    if config.grid_overrides:
        grid = {k: tuple(v) for k, v in config.grid_overrides.items()}
    return base, grid


def run_baseline_system(system: str, prep: FoldPrep) -> list[tuple[str, ...]]:
    if system == "cnst":
        return [baselines.predict_constant(s).tokens for s in prep.test_segments]
    if system == "asc":
        return [baselines.predict_asc(s).tokens for s in prep.test_segments]
    if system == "fasc":
        model = baselines.fit_fasc(
            prep.train_segments, fold_index=prep.split.fold_index
        )
        return [baselines.predict_fasc(model, s).tokens for s in prep.test_segments]
    if system == "ret":
        index = baselines.build_retrieval_index(
            prep.train_segments, fold_index=prep.split.fold_index
        )
        return [baselines.predict_ret(index, s).tokens for s in prep.test_segments]
    raise ConfigError(f"not a baseline system: {system}")


def train_neural_system(system: str, prep: FoldPrep, config: ExperimentConfig):
    """Grid-search one neural system on one fold; returns (model, manifest)."""
    modality = NEURAL_SYSTEMS[system]
    base, grid = resolve_hparams(config)
    run_seed = derive_seed("train", config.seed, system, prep.split.fold_index)
    result = grid_search(prep.fold_data, modality, base.with_seed(run_seed), grid)
    manifest = {
        "system": system,
        "fold": prep.split.fold_index,
        "modality": modality,
        "seed": run_seed,
        "best_cell": {
            "d_model": result.best_cell[0],
            "n_layers": result.best_cell[1],
            "lambda_reg": result.best_cell[2],
        },
        "best_step": result.best_step,
        "best_dev_rouge_l": result.best_dev_rouge_l,
        "cells": [
            {
                "d_model": c.d_model,
                "n_layers": c.n_layers,
                "lambda_reg": c.lambda_reg,
                "checkpoints": [
                    {"step": s, "dev_rouge_l": r} for s, r in c.checkpoints
                ],
                "error": c.error,
            }
            for c in result.cells
        ],
    }
    return result.model, manifest


def run_system_on_fold(system: str, prep: FoldPrep, config: ExperimentConfig):
    """Predictions for the fold's test set, plus a manifest and a parameter
    snapshot for neural systems."""
    manifest = None
    snapshot = None
    if system in NEURAL_SYSTEMS:
        model, manifest = train_neural_system(system, prep, config)
        predictions = model.greedy_decode(
            list(prep.fold_data.test),
            derive_seed("test-decode", config.seed, system, prep.split.fold_index),
            prep.fold_data.oracle_labels,
        )
        snapshot = model.parameter_snapshot()
    else:
        predictions = run_baseline_system(system, prep)
    return predictions, manifest, snapshot


def evaluate_predictions(
    system: str,
    prep: FoldPrep,
    predictions: list[tuple[str, ...]],
) -> MetricReport:
    references = [s.caption.tokens for s in prep.test_segments]
    segment_ids = [s.segment_id for s in prep.test_segments]
    div = diversity(
        predictions,
        [s.caption.tokens for s in prep.train_segments],
        prep.fold_data.vocab,
    )
    return evaluate(
        system,
        prep.split.fold_index,
        segment_ids,
        predictions,
        references,
        diversity_report=div,
    )


# ---------------------------------------------------------------------------
# cell task (picklable; workers rebuild everything from paths + primitives)
# ---------------------------------------------------------------------------


def _config_payload(config: ExperimentConfig) -> dict:
    from dataclasses import asdict

    return asdict(config)


def _cell_task(payload: dict) -> dict:
    config = ExperimentConfig(**payload["config"])
    corpus = ingest(config.corpus, config.features_dir)
    split = FoldSplit(
        fold_index=payload["fold_index"],
        train_ids=tuple(payload["train_ids"]),
        dev_ids=tuple(payload["dev_ids"]),
        test_ids=tuple(payload["test_ids"]),
        seed=config.splits_seed,
    )
    labels = load_labels(config.oracle_labels) if config.oracle_labels else None
    base, _ = resolve_hparams(config)
    prep = prepare_fold(
        corpus,
        split,
        config.vocab_min_count,
        base.max_input_tokens,
        labels=labels,
        oracle_fraction=config.oracle_fraction,
    )
    system = payload["system"]
    predictions, manifest, snapshot = run_system_on_fold(system, prep, config)
    report = evaluate_predictions(system, prep, predictions)
    return {
        "system": system,
        "fold": split.fold_index,
        "segment_ids": list(report.segment_ids),
        "predictions": [list(p) for p in predictions],
        "report": report.as_dict(),
        "per_segment": {k: list(v) for k, v in report.per_segment.items()},
        "diversity": report.diversity.as_dict(),
        "manifest": manifest,
        "snapshot": snapshot,
    }


# ---------------------------------------------------------------------------
# artifact writing
# ---------------------------------------------------------------------------


def write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")


def write_predictions(path: Path, system: str, segment_ids, predictions) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        json.dumps(
            {"segment_id": sid, "system": system, "tokens": list(tokens)},
            sort_keys=True,
        )
        for sid, tokens in zip(segment_ids, predictions)
    ]
    path.write_text("\n".join(lines) + "\n", "utf-8")


def write_per_segment_csv(path: Path, segment_ids, per_segment: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["segment_id", "metric", "value"])
        for metric in sorted(per_segment):
            for sid, value in zip(segment_ids, per_segment[metric]):
                writer.writerow([sid, metric, repr(float(value))])


@dataclass
class ExperimentResult:
    """In-memory view of a cmd_run: per-cell reports plus aggregates."""

    cells: dict  # (system, fold) -> cell dict
    summary: dict
    significance: list
    output_dir: Path


def _aggregate_summary(config: ExperimentConfig, cells: dict) -> dict:
    systems = {}
    for system in config.systems:
        per_metric = {}
        for metric in METRICS:
            scores = [
                cells[(system, j)]["report"][metric] for j in range(config.J)
            ]
            per_metric[metric] = {
                "mean": float(np.mean(scores)),
                "per_fold": scores,
            }
        per_metric["diversity"] = {
            key: float(
                np.mean([cells[(system, j)]["diversity"][key] for j in range(config.J)])
            )
            for key in ("vocab_coverage", "pct_not_copied", "pct_unique")
        }
        systems[system] = per_metric
    return {
        "J": config.J,
        "profile": config.profile,
        "seed": config.seed,
        "splits_seed": config.splits_seed,
        "systems": systems,
    }


def _significance_matrix(config: ExperimentConfig, cells: dict) -> list:
    out = []
    systems = list(config.systems)
    for metric in METRICS:
        pairs = []
        for i, sys_a in enumerate(systems):
            for sys_b in systems[i + 1 :]:
                fold_a = [cells[(sys_a, j)]["report"][metric] for j in range(config.J)]
                fold_b = [cells[(sys_b, j)]["report"][metric] for j in range(config.J)]
                kwargs = {}
                if config.pairing == "segments":
                    kwargs["segment_scores_a"] = [
                        v for j in range(config.J)
                        for v in cells[(sys_a, j)]["per_segment"][metric]
                    ]
                    kwargs["segment_scores_b"] = [
                        v for j in range(config.J)
                        for v in cells[(sys_b, j)]["per_segment"][metric]
                    ]
                try:
                    res = combined_significance(
                        fold_a, fold_b, alpha=config.alpha, **kwargs
                    )
                except ValidationError:
                    continue
                pairs.append(
                    {
                        "system_a": sys_a,
                        "system_b": sys_b,
                        "wilcoxon_p": res.wilcoxon_p,
                        "corrected_t_p": res.corrected_t_p,
                        "combined_p": res.combined_p,
                        "significant": res.significant,
                    }
                )
        out.append({"metric": metric, "pairs": pairs})
    return out


def run_experiment(config: ExperimentConfig, jobs: int = 1, log=None) -> ExperimentResult:
    """cmd_run: fit/train, decode, and score every fold x system cell, then
    write per-fold reports, the mean-over-folds summary, diversity, and the
    significance matrix."""
    config.validate()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = ingest(config.corpus, config.features_dir)
    folds = make_folds(corpus, config.J, config.splits_seed)
    save_splits(folds, out_dir / "splits.json")
    payloads = []
    for split in folds:
        for system in config.systems:
            payloads.append(
                {
                    "config": _config_payload(config),
                    "fold_index": split.fold_index,
                    "train_ids": list(split.train_ids),
                    "dev_ids": list(split.dev_ids),
                    "test_ids": list(split.test_ids),
                    "system": system,
                }
            )
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cell_task, payloads))
    else:
        results = []
        for payload in payloads:
            if log:
                log(f"running {payload['system']} fold {payload['fold_index']}")
            results.append(_cell_task(payload))
    cells = {(r["system"], r["fold"]): r for r in results}

    for (system, fold), cell in sorted(cells.items()):
        tag = f"{system.replace('+', '_')}_fold{fold}"
        write_predictions(
            out_dir / "predictions" / f"{tag}.jsonl",
            system,
            cell["segment_ids"],
            cell["predictions"],
        )
        report_payload = dict(cell["report"])
        report_payload["diversity"] = cell["diversity"]
        write_json(out_dir / "reports" / f"{tag}.json", report_payload)
        if config.per_segment_csv:
            write_per_segment_csv(
                out_dir / "per_segment" / f"{tag}.csv",
                cell["segment_ids"],
                cell["per_segment"],
            )
        if cell["manifest"] is not None:
            write_json(out_dir / "manifests" / f"{tag}.json", cell["manifest"])
        if cell["snapshot"] is not None:
            ckpt_dir = out_dir / "checkpoints"
            ckpt_dir.mkdir(parents=True, exist_ok=True)
            save_checkpoint(
                ckpt_dir / f"{tag}.cfck",
                cell["snapshot"],
                {k: v for k, v in cell["manifest"].items() if k != "cells"},
            )

    summary = _aggregate_summary(config, cells)
    write_json(out_dir / "summary.json", summary)
    diversity_payload = {
        system: summary["systems"][system]["diversity"] for system in config.systems
    }
    write_json(out_dir / "diversity.json", diversity_payload)
    significance = _significance_matrix(config, cells)
    write_json(out_dir / "significance.json", significance)
    return ExperimentResult(
        cells=cells, summary=summary, significance=significance, output_dir=out_dir
    )


# ---------------------------------------------------------------------------
# oracle sweep
# ---------------------------------------------------------------------------


def run_oracle_sweep(config: ExperimentConfig, jobs: int = 1, log=None) -> dict:
    """cmd_oracle_sweep: Oracle and AT+Oracle ROUGE-L across label-set
    fractions on one fold."""
    config.validate()
    if not config.oracle_labels:
        raise ConfigError("oracle sweep requires oracle.labels")
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = ingest(config.corpus, config.features_dir)
    folds = make_folds(corpus, config.J, config.splits_seed)
    if not 0 <= config.oracle_fold < len(folds):
        raise ConfigError(f"oracle.fold {config.oracle_fold} outside 0..{len(folds)-1}")
    split = folds[config.oracle_fold]
    labels = load_labels(config.oracle_labels)
    base, _ = resolve_hparams(config)
    sweep_systems = [s for s in ("oracle", "at+oracle") if s in config.systems] or [
        "oracle", "at+oracle",
    ]
    series: dict[str, list[float]] = {s: [] for s in sweep_systems}
    for fraction in config.oracle_fractions:
        sweep_config = replace(config, oracle_fraction=fraction)
        prep = prepare_fold(
            corpus, split, config.vocab_min_count, base.max_input_tokens,
            labels=labels, oracle_fraction=fraction,
        )
        for system in sweep_systems:
            if log:
                log(f"sweep fraction {fraction} system {system}")
            predictions, _, _ = run_system_on_fold(system, prep, sweep_config)
            references = [s.caption.tokens for s in prep.test_segments]
            series[system].append(rouge_l(predictions, references))
    payload = {
        "fold": config.oracle_fold,
        "fractions": list(config.oracle_fractions),
        "rouge_l": series,
    }
    write_json(out_dir / "sweep.json", payload)
    return payload


# ---------------------------------------------------------------------------
# complementarity analysis
# ---------------------------------------------------------------------------


def run_analysis(config: ExperimentConfig, jobs: int = 1, log=None) -> dict:
    """cmd_analyze: train both DANs per fold, emit word AUC records, top-k
    tables, and the stated-rate correlations."""
    config.validate()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = ingest(config.corpus, config.features_dir)
    folds = make_folds(corpus, config.J, config.splits_seed)
    base, _ = resolve_hparams(config)
    dan_hp = DanHyperParams(**config.dan_overrides) if config.dan_overrides else DanHyperParams()
    per_fold = []
    for split in folds:
        prep = prepare_fold(
            corpus, split, config.vocab_min_count, base.max_input_tokens
        )
        if log:
            log(f"training DANs on fold {split.fold_index}")
        fold_results = {}
        for modality in ("asr", "video"):
            seed = derive_seed("dan", config.seed, modality, split.fold_index)
            clf = train_dan(
                list(prep.fold_data.train),
                modality,
                prep.fold_data.vocab,
                corpus.feature_dim,
                replace(dan_hp, seed=seed),
            )
            fold_results[modality] = clf
        per_fold.append(
            fold_word_aucs(
                fold_results["asr"],
                fold_results["video"],
                list(prep.fold_data.test),
                min_freq=config.analysis_min_word_freq,
            )
        )
    records = word_aucs(per_fold, corpus.segments())
    if not records:
        raise ValidationError(
            "no word passed the frequency threshold; lower analysis.min_word_freq"
        )
    report = complementarity_report(records, top_k=config.analysis_top_k)
    csv_path = out_dir / "word_aucs.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["word", "auc_t", "auc_v", "auc_mu", "auc_delta", "stated_rate", "freq"]
        )
        for r in records:
            writer.writerow(
                [
                    r.word,
                    repr(r.auc_t),
                    repr(r.auc_v),
                    repr(r.auc_mu),
                    repr(r.auc_delta),
                    "" if r.stated_rate is None else repr(r.stated_rate),
                    r.gt_segment_freq,
                ]
            )
    payload = report.as_dict()
    write_json(out_dir / "complementarity.json", payload)
    return payload
