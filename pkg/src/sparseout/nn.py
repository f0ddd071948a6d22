"""Feedforward layers, MSE loss, backprop and plain minibatch SGD.

Every layer exposes the same small protocol::

    forward(x, train, rng) -> Tensor
    backward(grad) -> Tensor          # gradient w.r.t. the layer input
    params() -> list[(param, grad)]   # empty for parameter-free layers
    zero_grad()

Gradients accumulate across ``backward`` calls until ``zero_grad``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidHyperparameterError, InvalidInputError, StateError
from .tensor import Rng, Tensor, add_row, as_tensor, matmul, zeros


def glorot_uniform(fan_in: int, fan_out: int, rng: Rng) -> Tensor:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


class Linear:
    """Affine map ``x @ W.T + b`` with ``W`` of shape (out, in)."""

    def __init__(self, in_features: int, out_features: int, rng: Rng | None = None):
        self.in_features = in_features
        self.out_features = out_features
        if rng is None:
            self.W = zeros(out_features, in_features)
        else:
            self.W = glorot_uniform(in_features, out_features, rng)
        self.b = zeros(1, out_features)
        self.gradW = zeros(out_features, in_features)
        self.gradb = zeros(1, out_features)
        self._input: Tensor | None = None

    @classmethod
    def from_arrays(cls, W, b=None) -> "Linear":
        W = as_tensor(W)
        layer = cls(W.shape[1], W.shape[0])
        layer.W = W.copy()
        if b is not None:
            b = as_tensor(b)
            if b.shape != (1, W.shape[0]):
                raise DimensionError(f"bias shape {b.shape} does not match weights {W.shape}")
            layer.b = b.copy()
        return layer

    def forward(self, x: Tensor, train: bool = True, rng: Rng | None = None) -> Tensor:
        if x.shape[1] != self.in_features:
            raise DimensionError(
                f"linear layer expects {self.in_features} input columns, got shape {x.shape}"
            )
        self._input = x if train else None
        return add_row(matmul(x, self.W.T), self.b)

    def backward(self, grad: Tensor) -> Tensor:
        if self._input is None:
            raise StateError("Linear.backward called without a train-mode forward")
        self.gradW += grad.T @ self._input
        self.gradb += grad.sum(axis=0, keepdims=True)
        return grad @ self.W

    def params(self):
        return [(self.W, self.gradW), (self.b, self.gradb)]

    def zero_grad(self) -> None:
        self.gradW[...] = 0.0
        self.gradb[...] = 0.0


class _Activation:
    in_features = out_features = None

    def __init__(self):
        self._cache: Tensor | None = None

    def params(self):
        return []

    def zero_grad(self) -> None:
        pass

    def _cached(self) -> Tensor:
        if self._cache is None:
            raise StateError(f"{type(self).__name__}.backward called without a train-mode forward")
        return self._cache


class ReLU(_Activation):
    def forward(self, x, train=True, rng=None):
        out = np.maximum(x, 0.0)
        self._cache = x if train else None
        return out

    def backward(self, grad):
        # derivative taken as 0 at exactly 0
        return grad * (self._cached() > 0.0)


def sigmoid(x: Tensor) -> Tensor:
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Sigmoid(_Activation):
    def forward(self, x, train=True, rng=None):
        out = sigmoid(x)
        self._cache = out if train else None
        return out

    def backward(self, grad):
        s = self._cached()
        return grad * s * (1.0 - s)


def relu_forward(a: Tensor) -> Tensor:
    return np.maximum(a, 0.0)


def sigmoid_forward(a: Tensor) -> Tensor:
    return sigmoid(a)


def linear_forward(layer: Linear, a_prev: Tensor) -> Tensor:
    return layer.forward(a_prev, train=True)


def mse_loss(pred: Tensor, target: Tensor) -> tuple[float, Tensor]:
    """Mean squared error over all elements and its gradient w.r.t. ``pred``."""
    if pred.shape != target.shape:
        raise DimensionError(f"mse_loss: shape mismatch {pred.shape} vs {target.shape}")
    diff = pred - target
    n = diff.size
    return float(np.sum(diff * diff) / n), 2.0 * diff / n


class Network:
    """Ordered stack of layers sharing a train/eval mode."""

    def __init__(self, layers):
        self.layers = list(layers)
        self.training = True
        self._ready = False
        width = None
        for i, layer in enumerate(self.layers):
            if layer.in_features is not None:
                if width is not None and layer.in_features != width:
                    raise DimensionError(
                        f"layer {i} expects {layer.in_features} inputs but receives {width}"
                    )
                width = layer.out_features

    def train(self) -> "Network":
        self.training = True
        return self

    def eval(self) -> "Network":
        self.training = False
        return self

    def forward(self, x: Tensor, rng: Rng | None = None, upto: int | None = None) -> Tensor:
        """Run the stack; ``upto`` stops after layer ``upto`` (inclusive)."""
        stop = len(self.layers) if upto is None else upto + 1
        for layer in self.layers[:stop]:
            x = layer.forward(x, train=self.training, rng=rng)
        self._ready = self.training and upto is None
        return x

    __call__ = forward

    def backward(self, loss_grad: Tensor) -> Tensor:
        if not self._ready:
            raise StateError("backward requires a preceding full train-mode forward")
        grad = loss_grad
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def params(self):
        return [pg for layer in self.layers for pg in layer.params()]

    def zero_grad(self) -> None:
        for layer in self.layers:
            layer.zero_grad()


def backward(net: Network, loss_grad: Tensor) -> Tensor:
    return net.backward(loss_grad)


@dataclass(frozen=True)
class SgdConfig:
    learning_rate: float = 0.1
    batch_size: int = 128
    epochs: int = 1

    def __post_init__(self):
        if not self.learning_rate >= 0.0:
            raise InvalidHyperparameterError(f"learning_rate must be non-negative, got {self.learning_rate}")
        if self.batch_size < 1:
            raise InvalidHyperparameterError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise InvalidHyperparameterError(f"epochs must be >= 0, got {self.epochs}")


def sgd_step(net: Network, cfg: SgdConfig) -> None:
    lr = cfg.learning_rate
    for param, grad in net.params():
        param -= lr * grad


def train_epoch(net: Network, data: Tensor, targets: Tensor, cfg: SgdConfig, rng: Rng) -> float:
    """One pass over ``data`` in a shuffled order drawn from ``rng``.

    Returns the example-weighted mean training loss.
    """
    n = data.shape[0]
    if n == 0:
        raise InvalidInputError("cannot train on an empty dataset")
    if targets.shape[0] != n:
        raise DimensionError(f"data has {n} rows but targets have {targets.shape[0]}")
    net.train()
    order = rng.permutation(n)
    total = 0.0
    for start in range(0, n, cfg.batch_size):
        idx = order[start:start + cfg.batch_size]
        xb, tb = data[idx], targets[idx]
        net.zero_grad()
        pred = net.forward(xb, rng)
        loss, grad = mse_loss(pred, tb)
        net.backward(grad)
        sgd_step(net, cfg)
        total += loss * len(idx)
    return total / n


def predict(net: Network, data: Tensor) -> Tensor:
    """Eval-mode forward that restores the previous mode."""
    was_training = net.training
    net.eval()
    try:
        return net.forward(data)
    finally:
        net.training = was_training
