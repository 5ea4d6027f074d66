"""Command-line interface: run, oracle-sweep, analyze, report, synth,
stats, ingest. Exit codes: 0 ok, 1 internal error, 2 config/user error."""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from dataclasses import asdict
from pathlib import Path

from ..corpus import (
    acceptance_preset,
    compute_stats,
    emit,
    generate_synthetic_corpus,
    ingest,
    tiny_preset,
)
from ..errors import ConfigError, ParseError, StepcapError, ValidationError
from .config import ExperimentConfig, load_config
from .reporting import render_report
from .runner import run_analysis, run_experiment, run_oracle_sweep

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USER = 2

PRESETS = {"acceptance": acceptance_preset, "tiny": tiny_preset}


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, help="path to a JSON experiment config")
    parser.add_argument("--seed", type=int, default=None, help="override the run seed")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes")
    parser.add_argument(
        "--dry-run", action="store_true", help="validate the config and exit"
    )
    parser.add_argument(
        "--profile", choices=("paper", "desk"), default=None,
        help="hyperparameter profile override",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stepcap",
        description="Benchmark toolkit for captioning instructional-video "
        "segments from ASR tokens and frame features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run all configured systems over all folds")
    _common_flags(run)

    sweep = sub.add_parser(
        "oracle-sweep", help="Oracle / AT+Oracle over label-set fractions on one fold"
    )
    _common_flags(sweep)

    analyze = sub.add_parser(
        "analyze", help="per-word modality complementarity analysis"
    )
    _common_flags(analyze)

    report = sub.add_parser("report", help="render markdown tables from artifacts")
    _common_flags(report)
    report.add_argument("--output-dir", type=str, help="artifact directory")

    synth = sub.add_parser("synth", help="generate a synthetic corpus")
    _common_flags(synth)
    synth.add_argument("--preset", choices=sorted(PRESETS), default="acceptance")
    synth.add_argument("--out", type=str, required=True, help="output directory")

    stats = sub.add_parser("stats", help="print corpus statistics")
    _common_flags(stats)
    stats.add_argument("--corpus", type=str, required=True)
    stats.add_argument("--features-dir", type=str, default=None)

    ing = sub.add_parser("ingest", help="validate a corpus file")
    _common_flags(ing)
    ing.add_argument("--corpus", type=str, required=True)
    ing.add_argument("--features-dir", type=str, default=None)

    return parser


def _load_experiment_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("this command requires --config PATH")
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.profile is not None:
        overrides["profile"] = args.profile
    return load_config(args.config, overrides)


def _cmd_run(args) -> int:
    config = _load_experiment_config(args)
    if args.dry_run:
        config.validate()
        print(json.dumps({"plan": asdict(config)}, indent=2, sort_keys=True))
        return EXIT_OK
    result = run_experiment(config, jobs=args.jobs, log=lambda m: print(m, flush=True))
    print(f"wrote artifacts to {result.output_dir}")
    return EXIT_OK


def _cmd_oracle_sweep(args) -> int:
    config = _load_experiment_config(args)
    if args.dry_run:
        config.validate()
        if not config.oracle_labels:
            raise ConfigError("oracle sweep requires oracle.labels")
        print(json.dumps({"plan": asdict(config)}, indent=2, sort_keys=True))
        return EXIT_OK
    payload = run_oracle_sweep(config, jobs=args.jobs, log=lambda m: print(m, flush=True))
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_analyze(args) -> int:
    config = _load_experiment_config(args)
    if args.dry_run:
        config.validate()
        print(json.dumps({"plan": asdict(config)}, indent=2, sort_keys=True))
        return EXIT_OK
    payload = run_analysis(config, jobs=args.jobs, log=lambda m: print(m, flush=True))
    corr = payload["spearman_stated_rate_vs_auc_delta"]
    print(
        f"analyzed {payload['num_words']} words; "
        f"spearman(stated rate, auc delta) rho={corr['rho']:.3f} p={corr['p']:.4g}"
    )
    return EXIT_OK


def _cmd_report(args) -> int:
    output_dir = args.output_dir
    if output_dir is None and args.config:
        output_dir = _load_experiment_config(args).output_dir
    if output_dir is None:
        raise ConfigError("report needs --output-dir or --config")
    if args.dry_run:
        print(f"would render markdown from {output_dir}")
        return EXIT_OK
    text = render_report(output_dir)
    print(text)
    (Path(output_dir) / "report.md").write_text(text, "utf-8")
    return EXIT_OK


def _cmd_synth(args) -> int:
    spec = PRESETS[args.preset]()
    seed = args.seed if args.seed is not None else 0
    out = Path(args.out)
    if args.dry_run:
        print(
            f"would write {spec.num_videos} videos x {spec.segments_per_video} "
            f"segments to {out} (seed {seed})"
        )
        return EXIT_OK
    corpus = generate_synthetic_corpus(spec, seed=seed)
    out.mkdir(parents=True, exist_ok=True)
    emit(corpus, out / "corpus.jsonl", out / "features")
    (out / "labels.txt").write_text(
        "\n".join(spec.object_words()) + "\n", "utf-8"
    )
    echo = asdict(spec)
    echo["seed"] = seed
    (out / "synthspec.json").write_text(
        json.dumps(echo, indent=2, sort_keys=True) + "\n", "utf-8"
    )
    print(
        f"wrote {len(corpus.segments())} segments to {out / 'corpus.jsonl'} "
        f"({corpus.feature_dim}-dim features, labels in labels.txt)"
    )
    return EXIT_OK


def _cmd_stats(args) -> int:
    corpus = ingest(args.corpus, args.features_dir)
    if args.dry_run:
        print(f"corpus {args.corpus} is valid")
        return EXIT_OK
    print(json.dumps(compute_stats(corpus).as_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_ingest(args) -> int:
    corpus = ingest(args.corpus, args.features_dir)
    print(
        f"ok: {len(corpus.videos)} videos, {len(corpus.segments())} segments, "
        f"feature dim {corpus.feature_dim}"
    )
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "oracle-sweep": _cmd_oracle_sweep,
    "analyze": _cmd_analyze,
    "report": _cmd_report,
    "synth": _cmd_synth,
    "stats": _cmd_stats,
    "ingest": _cmd_ingest,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except StepcapError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
