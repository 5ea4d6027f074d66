"""Training loop with Adam, periodic checkpointing against dev ROUGE-L,
and grid search over (d_model, n_layers, lambda_reg)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from ..corpus.preprocess import PreparedExample
from ..corpus.vocab import Vocabulary
from ..errors import TrainingDivergedError, ValidationError
from ..metrics.rouge import rouge_l
from ..seeding import derive_seed, rng_for
from .model import HyperParams, TransformerModel

DIVERGENCE_FACTOR = 10.0
DIVERGENCE_PATIENCE = 100

PAPER_GRID = {
    "d_model": (128, 256),
    "n_layers": (2, 3),
    "lambda_reg": (0.0005, 0.001),
}


class Adam:
    """Adam over a named parameter dict (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(self, params, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p.data) for name, p in params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in params.items()}

    def step(self) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for name, p in self.params.items():
            if p.grad is None:
                continue
            g = p.grad
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g * g
            m_hat = self.m[name] / b1c
            v_hat = self.v[name] / b2c
            p.data = p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()


@dataclass(frozen=True)
class Checkpoint:
    """A parameter snapshot with its dev-set ROUGE-L."""

    step: int
    parameters: dict[str, np.ndarray]
    dev_rouge_l: float


@dataclass(frozen=True)
class FoldData:
    """Prepared examples for one fold, shared across systems."""

    fold_index: int
    vocab: Vocabulary
    train: tuple[PreparedExample, ...]
    dev: tuple[PreparedExample, ...]
    test: tuple[PreparedExample, ...]
    feature_dim: int
    oracle_labels: dict[str, tuple[str, ...]] = field(default_factory=dict)


def _dev_rouge(model: TransformerModel, fold: FoldData, run_seed: int) -> float:
    if not fold.dev:
        return 0.0
    outputs = model.greedy_decode(
        list(fold.dev), derive_seed("dev-decode", run_seed), fold.oracle_labels
    )
    refs = [ex.segment.caption.tokens for ex in fold.dev]
    return rouge_l(outputs, refs)


def train(
    fold: FoldData,
    hparams: HyperParams,
    modality: str,
    checkpoint_every: int | None = None,
    log=None,
) -> tuple[TransformerModel, list[Checkpoint]]:
    """Train one model on a fold; returns the model (final parameters) and
    the checkpoint list. Deterministic given hparams.seed.

    Aborts with TrainingDivergedError when the loss stays above 10x the
    initial loss for 100 consecutive steps.
    """
    if not fold.train:
        raise ValidationError("cannot train on an empty fold")
    model = TransformerModel(
        fold.vocab, hparams, modality, feature_dim=fold.feature_dim
    )
    optimizer = Adam(model.params, lr=hparams.lr)
    examples = list(fold.train)
    cadence = checkpoint_every or max(1, hparams.train_steps // 10)
    checkpoints: list[Checkpoint] = []
    initial_loss = None
    bad_steps = 0
    batch_rng = rng_for("batches", hparams.seed, modality)
    for step in range(1, hparams.train_steps + 1):
        size = min(hparams.batch_size, len(examples))
        picks = batch_rng.choice(len(examples), size=size, replace=False)
        batch = model.build_batch(
            [examples[i] for i in picks],
            seed=derive_seed("train-frames", hparams.seed, step),
            oracle_labels=fold.oracle_labels,
        )
        optimizer.zero_grad()
        loss, _ = model.forward(batch)
        loss.backward()
        optimizer.step()
        value = loss.item()
        if initial_loss is None:
            initial_loss = value
        if value > DIVERGENCE_FACTOR * initial_loss:
            bad_steps += 1
            if bad_steps >= DIVERGENCE_PATIENCE:
                raise TrainingDivergedError(
                    f"loss {value:.3f} stayed above {DIVERGENCE_FACTOR}x initial "
                    f"({initial_loss:.3f}) for {DIVERGENCE_PATIENCE} steps"
                )
        else:
            bad_steps = 0
        if step % cadence == 0:
            dev_score = _dev_rouge(model, fold, hparams.seed)
            checkpoints.append(
                Checkpoint(
                    step=step,
                    parameters=model.parameter_snapshot(),
                    dev_rouge_l=dev_score,
                )
            )
            if log is not None:
                log(f"step {step}: loss {value:.4f} dev_rouge_l {dev_score:.2f}")
    if not checkpoints:
        checkpoints.append(
            Checkpoint(
                step=hparams.train_steps,
                parameters=model.parameter_snapshot(),
                dev_rouge_l=_dev_rouge(model, fold, hparams.seed),
            )
        )
    return model, checkpoints


@dataclass(frozen=True)
class GridCellResult:
    d_model: int
    n_layers: int
    lambda_reg: float
    checkpoints: tuple[tuple[int, float], ...]  # (step, dev_rouge_l)
    error: str | None = None


@dataclass(frozen=True)
class GridSearchResult:
    model: TransformerModel
    best_cell: tuple[int, int, float]
    best_step: int
    best_dev_rouge_l: float
    cells: tuple[GridCellResult, ...]


def grid_search(
    fold: FoldData,
    modality: str,
    base_hparams: HyperParams,
    grid: dict | None = None,
    log=None,
) -> GridSearchResult:
    """Train every (d_model, n_layers, lambda_reg) cell and return the model
    loaded with the argmax-dev-ROUGE-L checkpoint across all runs.

    Ties keep the earliest checkpoint of the first cell in enumeration
    order. Per-cell training errors are recorded; the search fails only if
    every cell fails.
    """
    grid = grid or PAPER_GRID
    cells = list(
        itertools.product(grid["d_model"], grid["n_layers"], grid["lambda_reg"])
    )
    best = None  # (dev, cell, step, params, hparams)
    records: list[GridCellResult] = []
    for d_model, n_layers, lambda_reg in cells:
        hp = replace(
            base_hparams, d_model=d_model, n_layers=n_layers, lambda_reg=lambda_reg
        )
        try:
            _, checkpoints = train(fold, hp, modality, log=log)
        except (TrainingDivergedError, ValidationError) as exc:
            records.append(
                GridCellResult(d_model, n_layers, lambda_reg, (), error=str(exc))
            )
            continue
        records.append(
            GridCellResult(
                d_model,
                n_layers,
                lambda_reg,
                tuple((c.step, c.dev_rouge_l) for c in checkpoints),
            )
        )
        for ckpt in checkpoints:
            if best is None or ckpt.dev_rouge_l > best[0]:
                best = (
                    ckpt.dev_rouge_l,
                    (d_model, n_layers, lambda_reg),
                    ckpt.step,
                    ckpt.parameters,
                    hp,
                )
    if best is None:
        raise TrainingDivergedError("every grid cell failed to train")
    dev, cell, step, params, hp = best
    model = TransformerModel(fold.vocab, hp, modality, feature_dim=fold.feature_dim)
    model.load_parameters(params)
    return GridSearchResult(
        model=model,
        best_cell=cell,
        best_step=step,
        best_dev_rouge_l=dev,
        cells=tuple(records),
    )
