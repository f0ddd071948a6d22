"""MNIST IDX reader and a deterministic synthetic stand-in."""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidInputError
from .tensor import Tensor, make_rng

# IDX header: two zero bytes, a type code (0x08 = unsigned byte) and the
# number of dimensions, then one big-endian uint32 per dimension.
IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


@dataclass
class Dataset:
    images: Tensor
    labels: np.ndarray | None = None
    source: str = "synthetic"
    seed: int | None = None

    @property
    def n(self) -> int:
        return self.images.shape[0]

    @property
    def d(self) -> int:
        return self.images.shape[1]

    def split(self, holdout: float = 0.2) -> tuple[Tensor, Tensor]:
        """Leading rows for training, the last ``holdout`` fraction held out."""
        n_test = max(1, int(round(self.n * holdout)))
        if n_test >= self.n:
            raise InvalidInputError(f"dataset of {self.n} rows is too small to split")
        return self.images[:-n_test], self.images[-n_test:]


def _read_bytes(path) -> bytes:
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(2)
    opener = gzip.open if head == b"\x1f\x8b" else open
    with opener(path, "rb") as fh:
        return fh.read()


def _parse_idx(raw: bytes, expected_magic: int, path) -> np.ndarray:
    if len(raw) < 4:
        raise FormatError(f"{path}: truncated header at offset 0 ({len(raw)} bytes)")
    (magic,) = struct.unpack_from(">I", raw, 0)
    if magic != expected_magic:
        raise FormatError(
            f"{path}: bad magic 0x{magic:08x} at offset 0, expected 0x{expected_magic:08x}"
        )
    ndim = magic & 0xFF
    header_end = 4 + 4 * ndim
    if len(raw) < header_end:
        raise FormatError(f"{path}: truncated dimension header at offset {len(raw)}")
    dims = struct.unpack_from(f">{ndim}I", raw, 4)
    count = int(np.prod(dims, dtype=np.int64))
    if len(raw) < header_end + count:
        raise FormatError(
            f"{path}: truncated data at offset {len(raw)}, expected {header_end + count} bytes"
        )
    return np.frombuffer(raw, dtype=np.uint8, count=count, offset=header_end).reshape(dims)


def load_mnist_idx(images_path, labels_path=None) -> Dataset:
    """Read IDX images (optionally gzipped) into an (n, rows*cols) tensor in [0, 1]."""
    pixels = _parse_idx(_read_bytes(images_path), IMAGES_MAGIC, images_path)
    images = pixels.reshape(pixels.shape[0], -1).astype(np.float64) / 255.0
    labels = None
    if labels_path is not None:
        labels = _parse_idx(_read_bytes(labels_path), LABELS_MAGIC, labels_path).astype(np.int64)
        if labels.shape[0] != images.shape[0]:
            raise FormatError(
                f"{labels_path}: {labels.shape[0]} labels for {images.shape[0]} images"
            )
    if images.shape[0] < 1:
        raise FormatError(f"{images_path}: file contains no images")
    return Dataset(images=images, labels=labels, source="mnist-idx")


def write_idx_images(path, pixels: np.ndarray) -> None:
    """Write a uint8 array of shape (n, rows, cols) as an IDX image file."""
    pixels = np.asarray(pixels, dtype=np.uint8)
    n, rows, cols = pixels.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGES_MAGIC, n, rows, cols))
        fh.write(pixels.tobytes())


def synthesize_dataset(n: int, d: int, seed: int, k: int = 10, noise: float = 0.1,
                       density: float = 0.3) -> Dataset:
    """Mixture of ``k`` sparse random prototypes plus Gaussian noise, clipped to [0, 1].

    Prototypes are mostly zero with uniform intensities on a random support,
    loosely imitating digit images.
    """
    if n < 1 or d < 1:
        raise InvalidInputError(f"need n, d >= 1, got n={n}, d={d}")
    rng = make_rng(seed)
    support = rng.random((k, d)) < density
    prototypes = support * rng.uniform(0.5, 1.0, size=(k, d))
    labels = rng.integers(0, k, size=n)
    images = prototypes[labels] + noise * rng.standard_normal((n, d))
    np.clip(images, 0.0, 1.0, out=images)
    return Dataset(images=images, labels=labels, source="synthetic", seed=seed)
