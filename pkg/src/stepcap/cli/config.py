"""Experiment configuration: JSON document, validation, profiles."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..neural.profiles import PROFILES

ALL_SYSTEMS = (
    "cnst", "asc", "fasc", "ret", "oracle", "at", "at+video", "at+oracle", "video",
)
NEURAL_SYSTEMS = {
    "at": "asr",
    "at+video": "asr+video",
    "at+oracle": "asr+oracle",
    "oracle": "oracle",
    "video": "video",
}
DEFAULT_FRACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; loaded from a JSON key-value document."""

    corpus: str
    output_dir: str
    features_dir: str | None = None
    J: int = 3
    splits_seed: int = 13
    seed: int = 0
    systems: tuple[str, ...] = ("cnst", "asc", "fasc", "ret", "at")
    profile: str = "desk"
    hparams_overrides: dict = field(default_factory=dict)
    grid_overrides: dict | None = None
    vocab_min_count: int = 5
    oracle_labels: str | None = None
    oracle_fraction: float = 1.0
    oracle_fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    oracle_fold: int = 0
    analysis_min_word_freq: int = 5
    analysis_top_k: int = 10
    dan_overrides: dict = field(default_factory=dict)
    alpha: float = 0.01
    pairing: str = "folds"
    per_segment_csv: bool = False

    def validate(self, check_paths: bool = True) -> None:
        if not self.systems:
            raise ConfigError("config must name at least one system")
        unknown = [s for s in self.systems if s not in ALL_SYSTEMS]
        if unknown:
            raise ConfigError(
                f"unknown systems {unknown}; choose from {sorted(ALL_SYSTEMS)}"
            )
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}")
        if self.pairing not in ("folds", "segments"):
            raise ConfigError("significance pairing must be 'folds' or 'segments'")
        if self.J < 1:
            raise ConfigError("splits.J must be >= 1")
        needs_oracle = any("oracle" in s for s in self.systems)
        if needs_oracle and not self.oracle_labels:
            raise ConfigError("oracle systems require an oracle label file")
        if check_paths:
            if not Path(self.corpus).is_file():
                raise ConfigError(f"corpus file not found: {self.corpus}")
            if self.features_dir is not None and not Path(self.features_dir).is_dir():
                raise ConfigError(f"features_dir not found: {self.features_dir}")
            if self.oracle_labels and not Path(self.oracle_labels).is_file():
                raise ConfigError(f"oracle label file not found: {self.oracle_labels}")

    def neural_systems(self) -> list[str]:
        return [s for s in self.systems if s in NEURAL_SYSTEMS]


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    """Parse an ExperimentConfig from a JSON file, applying CLI overrides."""
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc.msg}") from exc
    return config_from_dict(raw, overrides)


def config_from_dict(raw: dict, overrides: dict | None = None) -> ExperimentConfig:
    raw = dict(raw)
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    splits = raw.get("splits", {})
    oracle = raw.get("oracle", {})
    analysis = raw.get("analysis", {})
    significance = raw.get("significance", {})
    try:
        return ExperimentConfig(
            corpus=str(raw["corpus"]),
            output_dir=str(raw["output_dir"]),
            features_dir=raw.get("features_dir"),
            J=int(splits.get("J", 3)),
            splits_seed=int(splits.get("seed", raw.get("seed", 13))),
            seed=int(raw.get("seed", 0)),
            systems=tuple(raw.get("systems", ("cnst", "asc", "fasc", "ret", "at"))),
            profile=str(raw.get("profile", "desk")),
            hparams_overrides=dict(raw.get("hparams", {})),
            grid_overrides=raw.get("grid"),
            vocab_min_count=int(raw.get("vocab_min_count", 5)),
            oracle_labels=oracle.get("labels"),
            oracle_fraction=float(oracle.get("fraction", 1.0)),
            oracle_fractions=tuple(oracle.get("fractions", DEFAULT_FRACTIONS)),
            oracle_fold=int(oracle.get("fold", 0)),
            analysis_min_word_freq=int(analysis.get("min_word_freq", 5)),
            analysis_top_k=int(analysis.get("top_k", 10)),
            dan_overrides=dict(analysis.get("dan", {})),
            alpha=float(significance.get("alpha", 0.01)),
            pairing=str(significance.get("pairing", "folds")),
            per_segment_csv=bool(raw.get("per_segment_csv", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
