"""Run artifacts besides metrics: weight traces, extremes, confusion, predictions."""

import csv
import os
from typing import List, Sequence, Tuple

import numpy as np

WEIGHT_TRACES_FILE = "weight_traces.csv"
EXTREMES_FILES = {"highest": "extremes_highest.csv", "lowest": "extremes_lowest.csv"}
CONFUSION_FILE = "confusion.csv"
CONFUSION_FAILURES_FILE = "confusion_failures.csv"
PREDICTIONS_FILE = "test_predictions.csv"
EXTREMES_DIR = "extremes"


def _writer(f):
    return csv.writer(f, lineterminator="\n")


def write_weight_traces(path: str, rows: Sequence[Tuple[int, int, float]]):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = _writer(f)
        writer.writerow(["sample_id", "epoch", "weight"])
        for sample_id, epoch, weight in rows:
            writer.writerow([sample_id, epoch, repr(float(weight))])


def write_pgm(path: str, pixels, shape: Tuple[int, int]):
    """Binary greyscale PGM (P5, maxval 255) from pixels in [0, 1]."""
    rows, cols = shape
    data = np.clip(np.rint(np.asarray(pixels, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)
    if data.size != rows * cols:
        raise ValueError(f"{data.size} pixels do not fill a {rows}x{cols} image")
    with open(path, "wb") as f:
        f.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def write_extremes(output_dir: str, highest, lowest, image_shape=None) -> List[str]:
    """CSV of (sample_id, label, final_weight) per group, plus PGM dumps for image data.

    Returns:
        Paths written
    """
    written = []
    for group, samples in (("highest", highest), ("lowest", lowest)):
        path = os.path.join(output_dir, EXTREMES_FILES[group])
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = _writer(f)
            writer.writerow(["sample_id", "label", "final_weight"])
            for sample in samples:
                writer.writerow([sample.sample_id, sample.label, repr(sample.weight)])
        written.append(path)
        if image_shape is None:
            continue
        image_dir = os.path.join(output_dir, EXTREMES_DIR)
        os.makedirs(image_dir, exist_ok=True)
        for rank, sample in enumerate(samples):
            image_path = os.path.join(image_dir, f"{group}_{rank:02d}_id{sample.sample_id}.pgm")
            write_pgm(image_path, sample.pixels, image_shape)
            written.append(image_path)
    return written


def write_confusion(path: str, counts):
    """Rows are true labels, columns predicted labels."""
    counts = np.asarray(counts)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = _writer(f)
        writer.writerow(["true_label"] + [f"pred_{c}" for c in range(counts.shape[1])])
        for label, row in enumerate(counts):
            writer.writerow([label] + [int(v) for v in row])


def write_predictions(path: str, sample_ids, labels, predictions):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = _writer(f)
        writer.writerow(["sample_id", "label", "prediction"])
        for sid, label, pred in zip(sample_ids, labels, predictions):
            writer.writerow([int(sid), int(label), int(pred)])


def read_predictions(path: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(sample_ids, labels, predictions)`` from a predictions CSV."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    ids = np.array([int(r["sample_id"]) for r in rows], dtype=np.int64)
    labels = np.array([int(r["label"]) for r in rows], dtype=np.int64)
    predictions = np.array([int(r["prediction"]) for r in rows], dtype=np.int64)
    return ids, labels, predictions
