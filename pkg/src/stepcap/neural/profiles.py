"""Named hyperparameter profiles.

"paper" keeps the full-scale settings (100K steps, batch 128, the
2x2x2 grid); "desk" is sized for CPU-minutes runs and a 1x1x1 grid.
"""

from __future__ import annotations

from .model import HyperParams
from .training import PAPER_GRID


def paper_profile(seed: int = 0) -> tuple[HyperParams, dict]:
    hparams = HyperParams(
        d_model=128,
        n_layers=2,
        n_heads=4,
        lambda_reg=5e-4,
        lr=1e-3,
        batch_size=128,
        train_steps=100_000,
        k_frames=10,
        max_input_tokens=80,
        max_decode_len=30,
        seed=seed,
    )
    return hparams, dict(PAPER_GRID)


def desk_profile(seed: int = 0) -> tuple[HyperParams, dict]:
    hparams = HyperParams(
        d_model=64,
        n_layers=2,
        n_heads=4,
        lambda_reg=5e-4,
        lr=1e-3,
        batch_size=32,
        train_steps=700,
        k_frames=10,
        max_input_tokens=80,
        max_decode_len=30,
        seed=seed,
    )
    grid = {"d_model": (64,), "n_layers": (2,), "lambda_reg": (5e-4,)}
    return hparams, grid


PROFILES = {"paper": paper_profile, "desk": desk_profile}
