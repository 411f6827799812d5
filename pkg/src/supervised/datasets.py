"""Dataset containers, IDX (MNIST) ingestion and synthetic datasets."""

import gzip
import os
import struct
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.data.defaults import (
    DATA_DIR_ENV,
    DEFAULT_DATA_DIR,
    MNIST_CLASSES,
    MNIST_FILES,
    SYNTHETIC_BAND,
    SYNTHETIC_OVERLAP,
)
from src.errors import BadMagicError, CountMismatchError, TruncatedFileError

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
SYNTHETIC_KINDS = ["two_gaussians_overlap"]


@dataclass
class Dataset:
    """Inputs ``(N, D)`` in float64 with integer labels and stable ids."""

    inputs: np.ndarray
    labels: np.ndarray
    split: str = "train"
    num_classes: int = MNIST_CLASSES
    sample_ids: Optional[np.ndarray] = None
    hard: Optional[np.ndarray] = None
    image_shape: Optional[Tuple[int, int]] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 2:
            raise ValueError(f"inputs must be 2-D, got shape {self.inputs.shape}")
        if len(self.inputs) != len(self.labels):
            raise ValueError(f"{len(self.inputs)} inputs but {len(self.labels)} labels")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError(f"labels must lie in [0, {self.num_classes})")
        if self.sample_ids is None:
            self.sample_ids = np.arange(len(self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    def subset(self, count: int) -> "Dataset":
        """First ``count`` samples; ``0`` keeps everything."""
        if count <= 0 or count >= len(self):
            return self
        return Dataset(
            inputs=self.inputs[:count],
            labels=self.labels[:count],
            split=self.split,
            num_classes=self.num_classes,
            sample_ids=self.sample_ids[:count],
            hard=None if self.hard is None else self.hard[:count],
            image_shape=self.image_shape,
            metadata=dict(self.metadata),
        )


def _read_bytes(path: str) -> bytes:
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rb") as f:
        return f.read()


def _parse_images(raw: bytes, path: str) -> Tuple[np.ndarray, Tuple[int, int]]:
    if len(raw) < 16:
        raise TruncatedFileError(f"{path}: image header needs 16 bytes, file has {len(raw)}")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IMAGES_MAGIC:
        raise BadMagicError(f"{path}: expected image magic 0x{IMAGES_MAGIC:08x}, got 0x{magic:08x}")
    expected = count * rows * cols
    body = raw[16:]
    if len(body) < expected:
        raise TruncatedFileError(f"{path}: header promises {expected} pixel bytes, found {len(body)}")
    pixels = np.frombuffer(body[:expected], dtype=np.uint8).reshape(count, rows * cols)
    return pixels, (rows, cols)


def _parse_labels(raw: bytes, path: str) -> np.ndarray:
    if len(raw) < 8:
        raise TruncatedFileError(f"{path}: label header needs 8 bytes, file has {len(raw)}")
    magic, count = struct.unpack(">II", raw[:8])
    if magic != LABELS_MAGIC:
        raise BadMagicError(f"{path}: expected label magic 0x{LABELS_MAGIC:08x}, got 0x{magic:08x}")
    body = raw[8:]
    if len(body) < count:
        raise TruncatedFileError(f"{path}: header promises {count} labels, found {len(body)}")
    return np.frombuffer(body[:count], dtype=np.uint8)


def load_idx(images_path: str, labels_path: str, split: str = "train",
             num_classes: int = MNIST_CLASSES) -> Dataset:
    """Load an IDX image/label file pair, scaling pixels into [0, 1].

    Args:
        images_path: IDX3 image file (optionally gzipped)
        labels_path: IDX1 label file (optionally gzipped)
        split: "train" or "test"
        num_classes: Label range

    Returns:
        Dataset

    Raises:
        BadMagicError, TruncatedFileError, CountMismatchError
    """
    pixels, shape = _parse_images(_read_bytes(images_path), images_path)
    labels = _parse_labels(_read_bytes(labels_path), labels_path)
    if len(pixels) != len(labels):
        raise CountMismatchError(
            f"{images_path} holds {len(pixels)} images but {labels_path} holds {len(labels)} labels"
        )
    return Dataset(
        inputs=pixels.astype(np.float64) / 255.0,
        labels=labels.astype(np.int64),
        split=split,
        num_classes=num_classes,
        image_shape=shape,
    )


def mnist_paths(data_dir: Optional[str] = None) -> dict:
    data_dir = data_dir or os.getenv(DATA_DIR_ENV, DEFAULT_DATA_DIR)
    return {key: os.path.join(data_dir, name) for key, name in MNIST_FILES.items()}


def load_mnist(data_dir: Optional[str] = None, train_subset: int = 0) -> Tuple[Dataset, Dataset]:
    """Load the MNIST train/test pair from ``data_dir`` (or $SCREENER_DATA_DIR).

    Raises:
        FileNotFoundError: naming every expected file that is missing
    """
    paths = mnist_paths(data_dir)
    resolved = {}
    missing = []
    for key, path in paths.items():
        if os.path.exists(path):
            resolved[key] = path
        elif os.path.exists(path + ".gz"):
            resolved[key] = path + ".gz"
        else:
            missing.append(path)
    if missing:
        raise FileNotFoundError(
            "MNIST files not found. Expected: " + ", ".join(missing)
            + " (run `python main.py fetch-mnist` or set " + DATA_DIR_ENV + ")"
        )
    train = load_idx(resolved["train_images"], resolved["train_labels"], split="train")
    test = load_idx(resolved["test_images"], resolved["test_labels"], split="test")
    return train.subset(train_subset), test


def make_synthetic(kind: str, n: int, seed: int, overlap: float = SYNTHETIC_OVERLAP,
                   split: str = "train") -> Dataset:
    """Two 2-D clusters with a controlled fraction of ambiguous samples.

    Labels are balanced coin flips. With probability ``overlap`` a sample is
    "hard": its first coordinate is uniform inside the band ``(-0.5, 0.5)``
    regardless of label. Easy samples sit at ``sign * (0.5 + |N(0,1)|)``,
    on their class's side of the band, so ``overlap = 0`` is linearly
    separable. The second coordinate is ``N(0,1)`` noise.
    """
    if kind not in SYNTHETIC_KINDS:
        raise ValueError(f"Unknown synthetic dataset: {kind}. Expected one of {SYNTHETIC_KINDS}")
    if n < 4:
        raise ValueError("synthetic datasets need n >= 4")
    if not 0.0 <= overlap <= 1.0:
        raise ValueError("overlap must lie in [0, 1]")

    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n)
    hard = rng.random(n) < overlap
    signs = 2.0 * labels - 1.0
    easy_x = signs * (SYNTHETIC_BAND + np.abs(rng.standard_normal(n)))
    hard_x = rng.uniform(-SYNTHETIC_BAND, SYNTHETIC_BAND, size=n)
    x1 = np.where(hard, hard_x, easy_x)
    x2 = rng.standard_normal(n)
    return Dataset(
        inputs=np.column_stack([x1, x2]),
        labels=labels,
        split=split,
        num_classes=2,
        hard=hard,
        metadata={"kind": kind, "overlap": overlap},
    )
