"""Minimal reverse-mode automatic differentiation over numpy arrays.

Float64 throughout. Each op records a closure that scatters the output
gradient back to its parents; backward() walks the graph in reverse
topological order. Verified against central finite differences by
neural.gradcheck.
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum grad down to `shape` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """A node in the autodiff graph."""

    __slots__ = ("data", "grad", "_parents", "_backward", "requires_grad")

    def __init__(self, data, parents=(), backward=None, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self._parents = tuple(p for p in parents if p.requires_grad)
        self._backward = backward
        self.requires_grad = requires_grad or bool(self._parents)

    # -- graph plumbing ----------------------------------------------------

    def _accumulate(self, grad: np.ndarray) -> None:
        # grads are never mutated in place, so aliasing the first one is safe
        self.grad = grad if self.grad is None else self.grad + grad

    def backward(self) -> None:
        """Backpropagate from a scalar root."""
        if self.data.size != 1:
            raise ValueError("backward() expects a scalar loss")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def zero_grad(self) -> None:
        self.grad = None

    # -- basic arithmetic ---------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def __add__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data + other.data, (self, other))

        def backward(g):
            if self.requires_grad:
                self._accumulate(_unbroadcast(g, self.data.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(g, other.data.shape))

        out._backward = backward
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, (self,))

        def backward(g):
            if self.requires_grad:
                self._accumulate(-g)

        out._backward = backward
        return out

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __mul__(self, other):
        other = as_tensor(other)
        out = Tensor(self.data * other.data, (self, other))

        def backward(g):
            if self.requires_grad:
                self._accumulate(_unbroadcast(g * other.data, self.data.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(g * self.data, other.data.shape))

        out._backward = backward
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return self * other ** -1.0
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return as_tensor(other) * self ** -1.0

    def __pow__(self, exponent: float):
        out = Tensor(self.data**exponent, (self,))

        def backward(g):
            if self.requires_grad:
                self._accumulate(g * exponent * self.data ** (exponent - 1.0))

        out._backward = backward
        return out

    def __matmul__(self, other):
        other = as_tensor(other)
        out = Tensor(np.matmul(self.data, other.data), (self, other))

        def backward(g):
            if self.requires_grad:
                ga = np.matmul(g, np.swapaxes(other.data, -1, -2))
                self._accumulate(_unbroadcast(ga, self.data.shape))
            if other.requires_grad:
                gb = np.matmul(np.swapaxes(self.data, -1, -2), g)
                other._accumulate(_unbroadcast(gb, other.data.shape))

        out._backward = backward
        return out

    # -- shape ops ----------------------------------------------------------

    def reshape(self, *shape):
        src_shape = self.data.shape
        out = Tensor(self.data.reshape(*shape), (self,))

        def backward(g):
            if self.requires_grad:
                self._accumulate(g.reshape(src_shape))

        out._backward = backward
        return out

    def transpose(self, *axes):
        axes = axes or tuple(reversed(range(self.data.ndim)))
        inverse = np.argsort(axes)
        out = Tensor(self.data.transpose(axes), (self,))

        def backward(g):
            if self.requires_grad:
                self._accumulate(g.transpose(inverse))

        out._backward = backward
        return out

    # -- elementwise nonlinearities ------------------------------------------

    def exp(self):
        value = np.exp(self.data)
        out = Tensor(value, (self,))

        def backward(g):
            if self.requires_grad:
                self._accumulate(g * value)

        out._backward = backward
        return out

    def log(self):
        out = Tensor(np.log(self.data), (self,))

        def backward(g):
            if self.requires_grad:
                self._accumulate(g / self.data)

        out._backward = backward
        return out

    def tanh(self):
        value = np.tanh(self.data)
        out = Tensor(value, (self,))

        def backward(g):
            if self.requires_grad:
                self._accumulate(g * (1.0 - value * value))

        out._backward = backward
        return out

    def relu(self):
        keep = self.data > 0
        out = Tensor(self.data * keep, (self,))

        def backward(g):
            if self.requires_grad:
                self._accumulate(g * keep)

        out._backward = backward
        return out

    # -- reductions -----------------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False):
        out = Tensor(self.data.sum(axis=axis, keepdims=keepdims), (self,))

        def backward(g):
            if not self.requires_grad:
                return
            grad = g
            if axis is not None and not keepdims:
                grad = np.expand_dims(grad, axis)
            self._accumulate(np.broadcast_to(grad, self.data.shape).copy())

        out._backward = backward
        return out

    def mean(self, axis=None, keepdims: bool = False):
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(data) -> Tensor:
    """A trainable leaf tensor."""
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True)


def concat(tensors: list[Tensor], axis: int) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.data.shape[axis] for t in tensors]
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors))

    def backward(g):
        offset = 0
        for t, size in zip(tensors, sizes):
            if t.requires_grad:
                index = [slice(None)] * g.ndim
                index[axis] = slice(offset, offset + size)
                t._accumulate(g[tuple(index)])
            offset += size

    out._backward = backward
    return out


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row gather: out[..., :] = table[ids[...], :]."""
    ids = np.asarray(ids)
    out = Tensor(table.data[ids], (table,))

    def backward(g):
        if table.requires_grad:
            grad = np.zeros_like(table.data)
            np.add.at(grad, ids.reshape(-1), g.reshape(-1, table.data.shape[-1]))
            table._accumulate(grad)

    out._backward = backward
    return out


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Layer normalization over the last axis (fused forward/backward)."""
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = Tensor(gamma.data * xhat + beta.data, (x, gamma, beta))

    def backward(g):
        if gamma.requires_grad:
            gamma._accumulate(_unbroadcast(g * xhat, gamma.data.shape))
        if beta.requires_grad:
            beta._accumulate(_unbroadcast(g, beta.data.shape))
        if x.requires_grad:
            gx = g * gamma.data
            mean_gx = gx.mean(axis=-1, keepdims=True)
            mean_gx_xhat = (gx * xhat).mean(axis=-1, keepdims=True)
            x._accumulate(inv * (gx - mean_gx - xhat * mean_gx_xhat))

    out._backward = backward
    return out


def masked_softmax(scores: Tensor, valid: np.ndarray) -> Tensor:
    """Softmax over the last axis restricted to valid positions.

    `valid` broadcasts against scores (1 = attendable). Rows with no valid
    position yield all-zero weights, so attention over an empty memory
    returns a zero context vector.
    """
    valid = np.broadcast_to(np.asarray(valid, dtype=np.float64), scores.data.shape)
    neg = -1e30
    shifted = np.where(valid > 0, scores.data, neg)
    shifted = shifted - shifted.max(axis=-1, keepdims=True)
    weights = np.exp(shifted) * valid
    denom = weights.sum(axis=-1, keepdims=True)
    probs = np.divide(weights, denom, out=np.zeros_like(weights), where=denom > 0)
    out = Tensor(probs, (scores,))

    def backward(g):
        if scores.requires_grad:
            inner = (g * probs).sum(axis=-1, keepdims=True)
            scores._accumulate(probs * (g - inner))

    out._backward = backward
    return out


def softmax_cross_entropy(logits: Tensor, targets: np.ndarray, valid: np.ndarray) -> Tensor:
    """Mean cross-entropy of integer targets over positions with valid == 1.

    logits: (..., V); targets/valid: matching leading shape.
    """
    targets = np.asarray(targets)
    valid = np.asarray(valid, dtype=np.float64)
    flat_logits = logits.data.reshape(-1, logits.data.shape[-1])
    flat_targets = targets.reshape(-1)
    flat_valid = valid.reshape(-1)
    count = max(1.0, flat_valid.sum())
    shifted = flat_logits - flat_logits.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    logp = shifted - lse
    picked = logp[np.arange(len(flat_targets)), flat_targets]
    loss = -(picked * flat_valid).sum() / count
    out = Tensor(loss, (logits,))

    def backward(g):
        if logits.requires_grad:
            grad = np.exp(logp)
            grad[np.arange(len(flat_targets)), flat_targets] -= 1.0
            grad *= (flat_valid / count)[:, None]
            logits._accumulate(float(g) * grad.reshape(logits.data.shape))

    out._backward = backward
    return out


def soft_cross_entropy(logits: Tensor, target_probs: np.ndarray, row_weight: np.ndarray) -> Tensor:
    """Weighted mean cross-entropy against soft target distributions.

    logits, target_probs: (N, V); row_weight: (N,) with weight 0 rows skipped.
    """
    target_probs = np.asarray(target_probs, dtype=np.float64)
    row_weight = np.asarray(row_weight, dtype=np.float64)
    if target_probs.shape != logits.data.shape or row_weight.shape != logits.data.shape[:1]:
        raise ValueError("soft_cross_entropy shape mismatch")
    total = max(1e-12, row_weight.sum())
    shifted = logits.data - logits.data.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    logp = shifted - lse
    loss = -((target_probs * logp).sum(axis=-1) * row_weight).sum() / total
    out = Tensor(loss, (logits,))

    def backward(g):
        if logits.requires_grad:
            softmax = np.exp(logp)
            mass = target_probs.sum(axis=-1, keepdims=True)
            grad = (softmax * mass - target_probs) * (row_weight / total)[:, None]
            logits._accumulate(float(g) * grad)

    out._backward = backward
    return out
