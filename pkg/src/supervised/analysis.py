"""Post-training analyses: confusion matrices, weight traces, extreme samples."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from src.nn.losses import softmax_cross_entropy
from src.nn.network import Network

PREDICT_CHUNK = 4096


def predict_classes(net: Network, inputs) -> np.ndarray:
    inputs = np.atleast_2d(inputs)
    chunks = [
        np.argmax(net.predict(inputs[start:start + PREDICT_CHUNK]), axis=1)
        for start in range(0, len(inputs), PREDICT_CHUNK)
    ]
    return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)


def per_sample_losses(net: Network, dataset) -> np.ndarray:
    """Unweighted cross-entropy of every sample in ``dataset``."""
    losses = [
        np.atleast_1d(softmax_cross_entropy(
            net.predict(dataset.inputs[start:start + PREDICT_CHUNK]),
            dataset.labels[start:start + PREDICT_CHUNK],
        ))
        for start in range(0, len(dataset), PREDICT_CHUNK)
    ]
    return np.concatenate(losses)


@dataclass
class ConfusionMatrix:
    """Rows are ground truth, columns are predictions."""

    counts: np.ndarray

    @classmethod
    def from_predictions(cls, labels, predictions, num_classes: int) -> "ConfusionMatrix":
        counts = np.zeros((num_classes, num_classes), dtype=np.int64)
        np.add.at(counts, (np.asarray(labels), np.asarray(predictions)), 1)
        return cls(counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def failures(self) -> "ConfusionMatrix":
        """Same matrix with successes (the diagonal) removed."""
        counts = self.counts.copy()
        np.fill_diagonal(counts, 0)
        return ConfusionMatrix(counts)

    def accuracy(self) -> float:
        if self.total == 0:
            return 0.0
        return float(np.trace(self.counts)) / self.total

    def precision(self) -> np.ndarray:
        predicted = self.counts.sum(axis=0)
        return np.divide(np.diag(self.counts), predicted,
                         out=np.zeros(len(predicted)), where=predicted > 0)

    def recall(self) -> np.ndarray:
        actual = self.counts.sum(axis=1)
        return np.divide(np.diag(self.counts), actual,
                         out=np.zeros(len(actual)), where=actual > 0)


def confusion_failures(net: Network, dataset) -> ConfusionMatrix:
    """Full confusion matrix of ``net`` on ``dataset``; use ``.failures()`` for the off-diagonal view."""
    return ConfusionMatrix.from_predictions(dataset.labels, predict_classes(net, dataset.inputs),
                                            dataset.num_classes)


def exclusive_failures(predictions_a, predictions_b, labels, sample_ids=None) -> Dict[str, np.ndarray]:
    """Ids misclassified by exactly one of two prediction vectors."""
    labels = np.asarray(labels)
    ids = np.arange(len(labels)) if sample_ids is None else np.asarray(sample_ids)
    wrong_a = np.asarray(predictions_a) != labels
    wrong_b = np.asarray(predictions_b) != labels
    return {
        "a_only": ids[wrong_a & ~wrong_b],
        "b_only": ids[wrong_b & ~wrong_a],
        "both": ids[wrong_a & wrong_b],
    }


@dataclass
class WeightTrace:
    sample_id: int
    epochs: List[int] = field(default_factory=list)
    weights: List[float] = field(default_factory=list)

    def append(self, epoch: int, weight: float):
        self.epochs.append(int(epoch))
        self.weights.append(float(weight))


def _positions(dataset, sample_ids) -> np.ndarray:
    lookup = {int(sid): pos for pos, sid in enumerate(dataset.sample_ids)}
    try:
        return np.array([lookup[int(sid)] for sid in sample_ids], dtype=np.int64)
    except KeyError as e:
        raise ValueError(f"Unknown sample id: {e.args[0]}") from e


def track_weights(screener, dataset, sample_ids, epoch: int,
                  traces: Optional[Dict[int, WeightTrace]] = None) -> Dict[int, WeightTrace]:
    """Append the current screener weight of each tracked sample."""
    traces = {} if traces is None else traces
    positions = _positions(dataset, sample_ids)
    weights = screener.weights(dataset.inputs[positions])
    for sid, weight in zip(sample_ids, weights):
        traces.setdefault(int(sid), WeightTrace(int(sid))).append(epoch, weight)
    return traces


class WeightTracker:
    """Epoch-boundary weight snapshots for a fixed set of training samples."""

    def __init__(self, sample_ids: Sequence[int]):
        self.sample_ids = [int(s) for s in sample_ids]
        self.traces: Dict[int, WeightTrace] = {}

    def track(self, screener, dataset, epoch: int):
        track_weights(screener, dataset, self.sample_ids, epoch, self.traces)

    def rows(self) -> List[Tuple[int, int, float]]:
        """``(sample_id, epoch, weight)`` ordered by sample, then epoch."""
        return [
            (sid, epoch, weight)
            for sid in sorted(self.traces)
            for epoch, weight in zip(self.traces[sid].epochs, self.traces[sid].weights)
        ]


@dataclass
class ExtremeSample:
    sample_id: int
    label: int
    weight: float
    pixels: np.ndarray


def extreme_weight_samples(screener, dataset, k: int) -> Tuple[List[ExtremeSample], List[ExtremeSample]]:
    """The ``k`` highest- and ``k`` lowest-weight training samples.

    Ties are broken by position so the export is deterministic.
    """
    weights = screener.weights(dataset.inputs)
    k = min(k, len(weights))
    order = np.argsort(-weights, kind="stable")

    def collect(positions) -> List[ExtremeSample]:
        return [
            ExtremeSample(int(dataset.sample_ids[p]), int(dataset.labels[p]), float(weights[p]), dataset.inputs[p])
            for p in positions
        ]

    lowest = np.argsort(weights, kind="stable")[:k]
    return collect(order[:k]), collect(lowest)


@dataclass
class WeightErrorAssociation:
    spearman: float
    top_decile_weight: float
    bottom_decile_weight: float
    hard_weight: Optional[float] = None
    easy_weight: Optional[float] = None


def weight_error_association(losses, weights, hard=None) -> WeightErrorAssociation:
    """How strongly screener weight tracks per-sample loss.

    Args:
        losses: Per-sample main-network losses
        weights: Screener weights for the same samples
        hard: Optional boolean flags for ambiguous samples

    Returns:
        WeightErrorAssociation
    """
    losses = np.asarray(losses, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if losses.shape != weights.shape or len(losses) < 10:
        raise ValueError("need at least 10 paired losses and weights")
    rho = stats.spearmanr(losses, weights).correlation
    order = np.argsort(losses, kind="stable")
    decile = max(1, len(losses) // 10)
    result = WeightErrorAssociation(
        spearman=float(rho),
        top_decile_weight=float(np.mean(weights[order[-decile:]])),
        bottom_decile_weight=float(np.mean(weights[order[:decile]])),
    )
    if hard is not None:
        hard = np.asarray(hard, dtype=bool)
        if hard.any():
            result.hard_weight = float(np.mean(weights[hard]))
        if (~hard).any():
            result.easy_weight = float(np.mean(weights[~hard]))
    return result
