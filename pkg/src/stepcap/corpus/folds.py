"""Cross-validation splitting: independent random 80/10/10 resamples.

Each fold is an independent resample of the video ids (not a disjoint
k-fold partition); the corrected resampled t-test assumes exactly this
overlap structure. The same splits are reused for every system.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

from ..errors import ValidationError
from ..seeding import rng_for
from .types import Corpus

TRAIN_FRAC, DEV_FRAC, TEST_FRAC = 0.8, 0.1, 0.1


@dataclass(frozen=True)
class FoldSplit:
    """One train/dev/test split of video ids."""

    fold_index: int
    train_ids: tuple[str, ...]
    dev_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    seed: int

    def __post_init__(self):
        parts = (set(self.train_ids), set(self.dev_ids), set(self.test_ids))
        if parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2]:
            raise ValidationError(f"fold {self.fold_index}: splits overlap")


def make_folds(corpus: Corpus, J: int, seed: int) -> list[FoldSplit]:
    """J independent, seeded 80/10/10 resamples at the video level.

    Rounding sends remainder videos to train. Deterministic in
    (corpus video ids, J, seed) only.
    """
    if J < 1:
        raise ValidationError("J must be >= 1")
    ids = sorted(corpus.video_ids())
    n = len(ids)
    if n < 3:
        raise ValidationError(f"need at least 3 videos to split, got {n}")
    if n < J * 10:
        warnings.warn(
            f"only {n} videos for J={J} folds; splits will overlap heavily",
            stacklevel=2,
        )
    n_dev = max(1, int(n * DEV_FRAC))
    n_test = max(1, int(n * TEST_FRAC))
    folds = []
    for j in range(J):
        shuffled = list(ids)
        rng_for("fold", seed, j).shuffle(shuffled)
        dev = tuple(sorted(shuffled[:n_dev]))
        test = tuple(sorted(shuffled[n_dev : n_dev + n_test]))
        train = tuple(sorted(shuffled[n_dev + n_test :]))
        folds.append(
            FoldSplit(fold_index=j, train_ids=train, dev_ids=dev, test_ids=test, seed=seed)
        )
    return folds


def save_splits(folds: list[FoldSplit], path: str | Path) -> None:
    payload = {
        "seed": folds[0].seed if folds else 0,
        "J": len(folds),
        "folds": [
            {"train": list(f.train_ids), "dev": list(f.dev_ids), "test": list(f.test_ids)}
            for f in folds
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")


def load_splits(path: str | Path) -> list[FoldSplit]:
    payload = json.loads(Path(path).read_text("utf-8"))
    return [
        FoldSplit(
            fold_index=j,
            train_ids=tuple(f["train"]),
            dev_ids=tuple(f["dev"]),
            test_ids=tuple(f["test"]),
            seed=int(payload["seed"]),
        )
        for j, f in enumerate(payload["folds"])
    ]
