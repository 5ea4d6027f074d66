"""Finite-difference verification of the autodiff gradients."""

from __future__ import annotations

import numpy as np

from ..seeding import rng_for
from . import autodiff as ad


def gradient_check(
    loss_fn,
    params: dict[str, ad.Tensor],
    epsilon: float = 1e-5,
    coords_per_param: int = 4,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    loss_fn() must rebuild the (deterministic) scalar loss from the current
    parameter values. A random subset of coordinates per parameter is
    probed; relative error uses max(|analytic|, |numeric|, 1e-6) as the
    denominator so near-zero coordinates do not blow up.
    """
    for p in params.values():
        p.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
        for name, p in params.items()
    }
    worst = 0.0
    for name in sorted(params):
        p = params[name]
        flat = p.data.reshape(-1)
        n = flat.size
        rng = rng_for("gradcheck", seed, name)
        picks = rng.choice(n, size=min(coords_per_param, n), replace=False)
        for idx in picks:
            original = flat[idx]
            flat[idx] = original + epsilon
            plus = loss_fn().item()
            flat[idx] = original - epsilon
            minus = loss_fn().item()
            flat[idx] = original
            numeric = (plus - minus) / (2.0 * epsilon)
            a = analytic[name].reshape(-1)[idx]
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
            worst = max(worst, err)
    return worst


def transformer_gradient_check(model, batch, epsilon: float = 1e-5, seed: int = 0) -> float:
    """Gradient check of the full teacher-forced loss of a (small) model."""
    return gradient_check(
        lambda: model.forward(batch)[0], model.params, epsilon=epsilon, seed=seed
    )
