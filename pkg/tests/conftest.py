import os
import struct

import numpy as np
import pytest

from src.utils.logger import StructuredLogger


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance test (needs --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def logger(tmp_path):
    return StructuredLogger(name=f"test-{tmp_path.name}", log_dir=str(tmp_path / "logs"))


def write_idx_images(path, images):
    images = np.asarray(images, dtype=np.uint8)
    count, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, count, rows, cols))
        f.write(images.tobytes())


def write_idx_labels(path, labels):
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.tobytes())


@pytest.fixture
def idx_writer():
    """Callable writing an image/label IDX pair into a directory."""

    def write(directory, images, labels, images_name="images-idx3-ubyte", labels_name="labels-idx1-ubyte"):
        images_path = os.path.join(directory, images_name)
        labels_path = os.path.join(directory, labels_name)
        write_idx_images(images_path, images)
        write_idx_labels(labels_path, labels)
        return images_path, labels_path

    return write
