"""Transformer encoder-decoder with pluggable modalities, hand-built
autodiff, Adam training, grid search, and greedy decoding."""

from . import autodiff
from .checkpoint_io import load_checkpoint, save_checkpoint
from .gradcheck import gradient_check, transformer_gradient_check
from .model import (
    MODALITIES,
    Batch,
    EncoderInputs,
    HyperParams,
    TransformerModel,
    decode_seed,
    sinusoidal_positions,
)
from .profiles import PROFILES, desk_profile, paper_profile
from .training import (
    PAPER_GRID,
    Adam,
    Checkpoint,
    FoldData,
    GridCellResult,
    GridSearchResult,
    grid_search,
    train,
)

__all__ = [
    "MODALITIES", "PAPER_GRID", "PROFILES", "Adam", "Batch", "Checkpoint",
    "EncoderInputs", "FoldData", "GridCellResult", "GridSearchResult",
    "HyperParams", "TransformerModel", "autodiff", "decode_seed",
    "desk_profile", "gradient_check", "grid_search", "load_checkpoint",
    "paper_profile", "save_checkpoint", "sinusoidal_positions", "train",
    "transformer_gradient_check",
]
