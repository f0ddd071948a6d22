"""Hoyer sparsity and the GLM variance / quadratic-penalty oracles."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, InvalidInputError, UndefinedInputError
from .nn import Network, sigmoid
from .regularizers import RegConfig
from .tensor import Rng, Tensor, as_tensor, bernoulli_mask

log = logging.getLogger(__name__)


def hoyer(x) -> float:
    """Hoyer's sparsity measure, 0 for a flat vector and 1 for a one-hot one.

    H(x) = (sqrt(d) - |x|_1 / |x|_2) / (sqrt(d) - 1)
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    d = x.size
    if d < 2:
        raise InvalidInputError(f"Hoyer measure needs at least 2 elements, got {d}")
    ax = np.abs(x)
    peak = ax.max()
    if peak == 0.0:
        raise UndefinedInputError("Hoyer measure is undefined for an all-zero vector")
    ax = ax / peak  # guards the L2 norm against overflow/underflow
    l1 = ax.sum()
    l2 = math.sqrt(np.dot(ax, ax))
    root_d = math.sqrt(d)
    return (root_d - l1 / l2) / (root_d - 1.0)


def hoyer_rows(acts: Tensor) -> tuple[np.ndarray, int]:
    """Per-row Hoyer values of the non-zero rows, plus the count of zero rows."""
    acts = as_tensor(acts)
    if acts.shape[1] < 2:
        raise InvalidInputError(f"Hoyer measure needs at least 2 columns, got {acts.shape[1]}")
    a = np.abs(acts)
    l1 = a.sum(axis=1)
    nonzero = l1 > 0
    a = a[nonzero]
    a = a / a.max(axis=1, keepdims=True)
    l1 = a.sum(axis=1)
    l2 = np.sqrt(np.einsum("ij,ij->i", a, a))
    root_d = math.sqrt(acts.shape[1])
    return (root_d - l1 / l2) / (root_d - 1.0), int((~nonzero).sum())


def network_hoyer(net: Network, data: Tensor, layer_index: int) -> float:
    """Mean Hoyer sparsity of one layer's eval-mode outputs over ``data`` rows.

    All-zero rows are skipped; more than half of them is treated as an error
    since the mean would then describe a minority of the inputs.
    """
    if not 0 <= layer_index < len(net.layers):
        raise InvalidInputError(f"layer index {layer_index} outside 0..{len(net.layers) - 1}")
    was_training = net.training
    net.eval()
    try:
        acts = net.forward(data, upto=layer_index)
    finally:
        net.training = was_training
    values, n_zero = hoyer_rows(acts)
    if n_zero:
        log.debug("network_hoyer skipped %d all-zero rows of %d", n_zero, acts.shape[0])
    if n_zero * 2 > acts.shape[0]:
        raise UndefinedInputError(
            f"{n_zero} of {acts.shape[0]} activation rows are all zero; Hoyer mean undefined"
        )
    return float(values.mean())


def linear_second_deriv(z):
    """A'' for Gaussian linear regression (identity link)."""
    return np.ones_like(np.asarray(z, dtype=np.float64))


def logistic_second_deriv(z):
    """A'' = s(z)(1 - s(z)) for logistic regression."""
    s = sigmoid(np.atleast_2d(np.asarray(z, dtype=np.float64)))
    return (s * (1.0 - s)).reshape(np.shape(z))


@dataclass
class GlmSpec:
    """Design matrix ``X`` (n, d), coefficients ``beta`` (d, 1) and ``A''``."""

    X: Tensor
    beta: Tensor
    second_deriv: Callable = linear_second_deriv

    def __post_init__(self):
        self.X = as_tensor(self.X)
        self.beta = np.asarray(self.beta, dtype=np.float64).reshape(-1, 1)
        if self.X.shape[1] != self.beta.shape[0]:
            raise DimensionError(
                f"design matrix {self.X.shape} incompatible with coefficients {self.beta.shape}"
            )
        if self.X.shape[0] < 1:
            raise InvalidInputError("GLM needs at least one row")

    def linear_predictor(self) -> np.ndarray:
        return (self.X @ self.beta).ravel()


def _row(glm: GlmSpec, row_i: int) -> np.ndarray:
    if not 0 <= row_i < glm.X.shape[0]:
        raise InvalidInputError(f"row index {row_i} outside 0..{glm.X.shape[0] - 1}")
    return glm.X[row_i]


def analytic_variance(glm: GlmSpec, row_i: int, cfg: RegConfig) -> float:
    """Closed-form Var[X~_i . beta] = sum_j (1-p)/p |X_ij|^q beta_j^2."""
    x = _row(glm, row_i)
    beta = glm.beta.ravel()
    return float((1.0 - cfg.p) / cfg.p * np.sum(np.abs(x) ** cfg.q * beta**2))


def perturb_features(x: np.ndarray, r: np.ndarray, q: float) -> np.ndarray:
    """X~ = X [1 + |X|^((q-2)/2) (r - 1)], written so that X = 0 stays finite."""
    return x + np.sign(x) * np.abs(x) ** (q / 2.0) * (r - 1.0)


def empirical_variance(glm: GlmSpec, row_i: int, cfg: RegConfig, n_draws: int, rng: Rng) -> float:
    """Monte-Carlo sample variance of X~_i . beta over ``n_draws`` masks."""
    if n_draws < 1000:
        raise InvalidInputError(f"n_draws must be at least 1000, got {n_draws}")
    x = _row(glm, row_i)
    r = bernoulli_mask(n_draws, x.size, cfg.p, rng)
    samples = perturb_features(x, r, cfg.q) @ glm.beta.ravel()
    return float(np.var(samples, ddof=1))


def quadratic_penalty(glm: GlmSpec, cfg: RegConfig) -> float:
    """sum_i A''(X_i . beta) / 2 * Var[X~_i . beta]."""
    weights = np.asarray(glm.second_deriv(glm.linear_predictor()), dtype=np.float64).ravel()
    variances = np.array([analytic_variance(glm, i, cfg) for i in range(glm.X.shape[0])])
    return float(np.sum(weights / 2.0 * variances))
