"""Sparseout: an L_q activation regularizer generalising Dropout."""

from .analysis import (
    GlmSpec,
    analytic_variance,
    empirical_variance,
    hoyer,
    linear_second_deriv,
    logistic_second_deriv,
    network_hoyer,
    quadratic_penalty,
)
from .errors import (
    DimensionError,
    FormatError,
    InvalidHyperparameterError,
    InvalidInputError,
    SparseoutError,
    StateError,
    UndefinedInputError,
)
from .nn import Linear, Network, ReLU, SgdConfig, Sigmoid, mse_loss, sgd_step, train_epoch
from .regularizers import (
    BridgeoutLinear,
    Dropout,
    RegConfig,
    Sparseout,
    bridgeout_forward,
    dropout_forward,
    sparseout_backward,
    sparseout_forward,
    sparseout_jacobian,
)
from .tensor import bernoulli_mask, make_rng, matmul

__version__ = "0.1.0"
