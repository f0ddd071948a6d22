"""Dense 2-D float64 tensors and seeded random masks.

A tensor here is simply a C-contiguous ``numpy.ndarray`` of dtype float64 with
exactly two dimensions, rows being batch examples.  The helpers in this module
validate shapes and raise :class:`DimensionError` with both shapes named
instead of relying on numpy broadcasting.

Random numbers come from ``numpy.random.Generator`` backed by PCG64.  PCG64
output and ``Generator.random`` are bit-stable across platforms for a given
seed, so Bernoulli outcomes are reproducible everywhere.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DimensionError, InvalidHyperparameterError

Tensor = np.ndarray
Rng = np.random.Generator

DTYPE = np.float64


def as_tensor(data, dtype=DTYPE) -> Tensor:
    """Coerce ``data`` into a 2-D contiguous array.

    Scalars become 1x1 and 1-D input becomes a single row.
    """
    arr = np.ascontiguousarray(data, dtype=dtype)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise DimensionError(f"expected a 2-D tensor, got shape {arr.shape}")
    return arr


def zeros(rows: int, cols: int) -> Tensor:
    return np.zeros((rows, cols), dtype=DTYPE)


def _same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    return a @ b


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "add")
    return a + b


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "sub")
    return a - b


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Hadamard product."""
    _same_shape(a, b, "mul")
    return a * b


def add_row(a: Tensor, row: Tensor) -> Tensor:
    """Add a 1 x cols row vector to every row of ``a``."""
    if row.shape != (1, a.shape[1]):
        raise DimensionError(f"add_row: cannot add {row.shape} to rows of {a.shape}")
    return a + row


def absolute(a: Tensor) -> Tensor:
    return np.abs(a)


def power(a: Tensor, exponent: float) -> Tensor:
    return np.power(a, exponent)


def sign(a: Tensor) -> Tensor:
    # np.sign already maps 0 -> 0
    return np.sign(a)


def elementwise(a: Tensor, f: Callable[[float], float]) -> Tensor:
    """Apply a scalar function to every element.

    Vectorised ufuncs are passed through; anything else is applied
    element by element.
    """
    if isinstance(f, np.ufunc):
        return f(a).astype(DTYPE, copy=False)
    out = np.empty_like(a, dtype=DTYPE)
    flat_in, flat_out = a.ravel(), out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = f(flat_in[i])
    return out


def make_rng(seed: int) -> Rng:
    return np.random.Generator(np.random.PCG64(seed))


def check_probability(p: float) -> None:
    if not (0.0 < p <= 1.0):
        raise InvalidHyperparameterError(f"keep probability must lie in (0, 1], got {p}")


def bernoulli_mask(rows: int, cols: int, p: float, rng: Rng) -> Tensor:
    """Sample an inverted-dropout mask.

    Each element is ``1/p`` with probability ``p`` and ``0`` otherwise, so the
    mask has unit mean.  Exactly ``rows * cols`` uniforms are drawn from
    ``rng`` regardless of ``p``, which keeps the generator stream aligned
    between runs that differ only in the regularizer.
    """
    check_probability(p)
    keep = rng.random((rows, cols)) < p
    return keep * (1.0 / p)
