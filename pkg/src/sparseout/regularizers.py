"""Sparseout, Dropout and a per-example Bridgeout reference.

Sparseout perturbs an activation ``a`` with a Bernoulli mask ``r`` taking
values in ``{0, 1/p}``::

    a_tilde = a + |a|**(q/2) * (r - 1)

so a dropped unit becomes ``a - |a|**(q/2)`` and a kept unit becomes
``a + |a|**(q/2) * (1-p)/p``.  The noise is zero-mean and its variance scales
with ``|a|**q``, which is what produces an L_q-type penalty on activations.
At ``q = 2`` and ``a >= 0`` the perturbation collapses to ``r * a``, i.e.
inverted Dropout.

The forward pass is evaluated as ``(a - s) + s * r`` with ``s = |a|**(q/2)``.
For ``q = 2`` and non-negative ``a`` this makes ``a - s`` exactly zero, so the
result is bitwise equal to ``r * a``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidHyperparameterError, StateError
from .nn import Linear
from .tensor import Rng, Tensor, bernoulli_mask, check_probability, make_rng

TRAIN = "train"
EVAL = "eval"


@dataclass(frozen=True)
class RegConfig:
    """Keep probability ``p``, norm exponent ``q`` and the gradient guard ``eps``."""

    p: float = 0.5
    q: float = 2.0
    eps: float = 1e-6

    def __post_init__(self):
        check_probability(self.p)
        if not (self.q > 0.0 and np.isfinite(self.q)):
            raise InvalidHyperparameterError(f"q must be a positive finite real, got {self.q}")
        if not self.eps > 0.0:
            raise InvalidHyperparameterError(f"eps must be positive, got {self.eps}")


def _is_train(mode) -> bool:
    if mode in (TRAIN, True):
        return True
    if mode in (EVAL, False):
        return False
    raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")


def perturbation_scale(a: Tensor, q: float) -> Tensor:
    """``|a|**(q/2)``; q=2 is exact and q=1 uses the correctly rounded sqrt."""
    if q == 2.0:
        return np.abs(a)
    if q == 1.0:
        return np.sqrt(np.abs(a))
    return np.power(np.abs(a), q / 2.0)


def perturb(a: Tensor, mask: Tensor, cfg: RegConfig) -> Tensor:
    """Apply the Sparseout perturbation with an explicit mask."""
    if mask.shape != a.shape:
        raise DimensionError(f"mask shape {mask.shape} does not match input {a.shape}")
    if cfg.p == 1.0:
        # r == 1 everywhere, the perturbation term vanishes
        return a.copy()
    s = perturbation_scale(a, cfg.q)
    return (a - s) + s * mask


def sparseout_forward(a: Tensor, cfg: RegConfig, mode=TRAIN, rng: Rng | None = None,
                      mask: Tensor | None = None) -> Tensor:
    """Sparseout-perturbed activations.

    In eval mode ``a`` is returned untouched and no randomness is consumed.
    In train mode a fresh mask is drawn from ``rng`` unless ``mask`` is given.
    """
    if not _is_train(mode):
        return a
    if mask is None:
        if rng is None:
            raise ValueError("train-mode sparseout_forward needs an rng or an explicit mask")
        mask = bernoulli_mask(a.shape[0], a.shape[1], cfg.p, rng)
    return perturb(a, mask, cfg)


def _slope(a: Tensor, cfg: RegConfig) -> Tensor:
    """Mask-independent factor ``(q/2) |a|**(q/2 - 1) sign(a)`` of the Jacobian."""
    q = cfg.q
    sgn = np.sign(a)
    if q == 2.0:
        sgn[a == 0] = 1.0
        return sgn
    absa = np.abs(a)
    if q < 2.0:
        absa = np.maximum(absa, cfg.eps)
    return (q / 2.0) * np.power(absa, q / 2.0 - 1.0) * sgn


def sparseout_jacobian(a: Tensor, mask: Tensor, cfg: RegConfig) -> Tensor:
    """Elementwise derivative of the perturbed output w.r.t. ``a``.

    ``J = 1 + (q/2) |a|**(q/2 - 1) (r - 1) sign(a)``.  For q < 2 the power is
    evaluated at ``max(|a|, eps)``.  At ``a == 0`` the one-sided derivative
    from the non-negative side is used when it is finite: ``J = 1`` for
    ``q != 2`` and ``J = r`` for ``q == 2`` (the Dropout gradient).
    """
    return 1.0 + _slope(a, cfg) * (mask - 1.0)


class Sparseout:
    """Sparseout as a network layer; caches ``a`` and ``r`` in train mode."""

    in_features = out_features = None

    def __init__(self, cfg: RegConfig):
        self.config = cfg
        self.input: Tensor | None = None
        self.mask: Tensor | None = None

    def forward(self, x: Tensor, train: bool = True, rng: Rng | None = None) -> Tensor:
        if not train:
            self.input = self.mask = None
            return x
        mask = bernoulli_mask(x.shape[0], x.shape[1], self.config.p, rng)
        self.input, self.mask = x, mask
        return perturb(x, mask, self.config)

    def backward(self, grad: Tensor) -> Tensor:
        return sparseout_backward(grad, self)

    def params(self):
        return []

    def zero_grad(self) -> None:
        pass


def sparseout_backward(upstream: Tensor, layer: Sparseout) -> Tensor:
    if layer.input is None or layer.mask is None:
        raise StateError("sparseout_backward needs a cached train-mode forward")
    return upstream * sparseout_jacobian(layer.input, layer.mask, layer.config)


def dropout_forward(a: Tensor, p: float, mode=TRAIN, rng: Rng | None = None,
                    mask: Tensor | None = None) -> Tensor:
    check_probability(p)
    if not _is_train(mode):
        return a
    if mask is None:
        if rng is None:
            raise ValueError("train-mode dropout_forward needs an rng or an explicit mask")
        mask = bernoulli_mask(a.shape[0], a.shape[1], p, rng)
    return a * mask


class Dropout:
    """Inverted Dropout with keep probability ``p``."""

    in_features = out_features = None

    def __init__(self, p: float = 0.5):
        check_probability(p)
        self.p = p
        self.mask: Tensor | None = None

    def forward(self, x, train=True, rng=None):
        if not train:
            self.mask = None
            return x
        self.mask = bernoulli_mask(x.shape[0], x.shape[1], self.p, rng)
        return x * self.mask

    def backward(self, grad):
        if self.mask is None:
            raise StateError("Dropout.backward needs a cached train-mode forward")
        return grad * self.mask

    def params(self):
        return []

    def zero_grad(self) -> None:
        pass


def bridgeout_forward(W: Tensor, a_prev: Tensor, cfg: RegConfig, rng: Rng,
                      b: Tensor | None = None) -> Tensor:
    """Affine output where every example sees its own perturbed copy of ``W``.

    ``W`` has shape (out, in).  For each row of ``a_prev`` a fresh mask over
    all of ``W`` is drawn and the Sparseout formula is applied to the weights.
    Deliberately unvectorised: this is the cost baseline.
    """
    if a_prev.shape[1] != W.shape[1]:
        raise DimensionError(f"bridgeout: inputs {a_prev.shape} incompatible with weights {W.shape}")
    out = np.empty((a_prev.shape[0], W.shape[0]))
    s = perturbation_scale(W, cfg.q)
    for n in range(a_prev.shape[0]):
        r = bernoulli_mask(W.shape[0], W.shape[1], cfg.p, rng)
        Wn = W.copy() if cfg.p == 1.0 else (W - s) + s * r
        out[n] = Wn @ a_prev[n]
    if b is not None:
        out += b
    return out


class BridgeoutLinear(Linear):
    """Linear layer regularized by per-example Bridgeout on its weights.

    The per-example masks are not stored; backward regenerates them from a
    child seed drawn during forward.  Used only for cost comparisons.
    """

    def __init__(self, in_features: int, out_features: int, cfg: RegConfig, rng: Rng | None = None):
        super().__init__(in_features, out_features, rng)
        self.config = cfg
        self._seed: int | None = None

    def forward(self, x, train=True, rng=None):
        if not train:
            self._seed = None
            return super().forward(x, train=False)
        if x.shape[1] != self.in_features:
            raise DimensionError(
                f"linear layer expects {self.in_features} input columns, got shape {x.shape}"
            )
        self._seed = int(rng.integers(2**63))
        self._input = x
        return bridgeout_forward(self.W, x, self.config, make_rng(self._seed), self.b)

    def backward(self, grad):
        if self._seed is None or self._input is None:
            raise StateError("BridgeoutLinear.backward needs a cached train-mode forward")
        cfg, W, x = self.config, self.W, self._input
        replay = make_rng(self._seed)
        s = perturbation_scale(W, cfg.q)
        slope = _slope(W, cfg)
        dx = np.empty_like(x)
        for n in range(x.shape[0]):
            r = bernoulli_mask(W.shape[0], W.shape[1], cfg.p, replay)
            Wn = W if cfg.p == 1.0 else (W - s) + s * r
            dx[n] = grad[n] @ Wn
            self.gradW += (1.0 + slope * (r - 1.0)) * np.outer(grad[n], x[n])
        self.gradb += grad.sum(axis=0, keepdims=True)
        return dx
