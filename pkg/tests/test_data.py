import gzip
import struct

import numpy as np
import pytest

from sparseout.data import load_mnist_idx, synthesize_dataset, write_idx_images
from sparseout.errors import FormatError


@pytest.fixture
def idx_images(tmp_path):
    pixels = np.arange(10 * 28 * 28, dtype=np.int64).reshape(10, 28, 28) % 256
    path = tmp_path / "images.idx3-ubyte"
    write_idx_images(path, pixels)
    return path, pixels


def test_load_well_formed(idx_images):
    path, pixels = idx_images
    ds = load_mnist_idx(path)
    assert ds.images.shape == (10, 784)
    assert ds.source == "mnist-idx"
    np.testing.assert_array_equal(ds.images[3], pixels[3].ravel() / 255.0)
    assert ds.images.max() == 1.0 and ds.images.min() == 0.0


def test_header_bytes_are_big_endian(idx_images):
    path, _ = idx_images
    raw = path.read_bytes()
    assert raw[:4] == b"\x00\x00\x08\x03"
    assert struct.unpack(">III", raw[4:16]) == (10, 28, 28)


def test_gzip_and_labels(tmp_path, idx_images):
    path, _ = idx_images
    gz = tmp_path / "images.gz"
    gz.write_bytes(gzip.compress(path.read_bytes()))
    labels = tmp_path / "labels"
    labels.write_bytes(struct.pack(">II", 0x00000801, 10) + bytes(range(10)))
    ds = load_mnist_idx(gz, labels)
    assert ds.labels.tolist() == list(range(10))


def test_label_magic_rejected_as_images(tmp_path):
    bad = tmp_path / "labels"
    bad.write_bytes(struct.pack(">II", 0x00000801, 3) + b"\x01\x02\x03")
    with pytest.raises(FormatError, match="magic 0x00000801 at offset 0"):
        load_mnist_idx(bad)


def test_truncated_file(tmp_path, idx_images):
    path, _ = idx_images
    cut = tmp_path / "cut"
    cut.write_bytes(path.read_bytes()[:1000])
    with pytest.raises(FormatError, match="offset 1000"):
        load_mnist_idx(cut)
    cut.write_bytes(path.read_bytes()[:10])
    with pytest.raises(FormatError, match="offset"):
        load_mnist_idx(cut)


def test_synthetic_contract():
    ds = synthesize_dataset(100, 64, 0)
    assert ds.images.shape == (100, 64)
    assert ds.images.min() >= 0.0 and ds.images.max() <= 1.0
    assert synthesize_dataset(100, 64, 0).images.tobytes() == ds.images.tobytes()
    assert not np.array_equal(synthesize_dataset(100, 64, 1).images, ds.images)


def test_split_holds_out_tail():
    ds = synthesize_dataset(50, 8, 0)
    train, test = ds.split()
    assert train.shape[0] == 40 and test.shape[0] == 10
    assert np.array_equal(test, ds.images[40:])
