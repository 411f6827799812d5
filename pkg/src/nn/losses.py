"""Per-sample losses and the weighted batch reduction."""

from typing import Union

import numpy as np
from scipy.special import log_softmax, softmax

ArrayLike = Union[float, np.ndarray]


def _check_targets(targets: np.ndarray, num_classes: int):
    if np.any(targets < 0) or np.any(targets >= num_classes):
        raise ValueError(f"Target class out of range [0, {num_classes})")


def softmax_cross_entropy(logits, targets) -> ArrayLike:
    """Compute ``-log softmax(logits)[target]``.

    Accepts one sample (``logits`` of shape ``(C,)`` and an int target) or a
    batch (``(B, C)`` and ``(B,)`` targets).

    Returns:
        Scalar loss or per-sample loss vector
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim == 1:
        target = int(targets)
        _check_targets(np.array([target]), logits.shape[0])
        return float(-log_softmax(logits)[target])
    targets = np.asarray(targets, dtype=np.int64)
    _check_targets(targets, logits.shape[1])
    log_probs = log_softmax(logits, axis=1)
    return -log_probs[np.arange(len(targets)), targets]


def softmax_cross_entropy_grad(logits, targets) -> np.ndarray:
    """Per-sample d(loss_i)/d(logits_i) for a batch."""
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.int64)
    _check_targets(targets, logits.shape[1])
    grad = softmax(logits, axis=1)
    grad[np.arange(len(targets)), targets] -= 1.0
    return grad


def huber_loss(pred, target, delta: float = 1.0) -> ArrayLike:
    """Quadratic within ``delta`` of the target, linear outside."""
    if delta <= 0:
        raise ValueError("Huber delta must be positive")
    diff = np.asarray(pred, dtype=np.float64) - np.asarray(target, dtype=np.float64)
    abs_diff = np.abs(diff)
    loss = np.where(abs_diff <= delta, 0.5 * diff ** 2, delta * (abs_diff - 0.5 * delta))
    return float(loss) if loss.ndim == 0 else loss


def huber_grad(pred, target, delta: float = 1.0) -> ArrayLike:
    """d(huber)/d(pred)."""
    if delta <= 0:
        raise ValueError("Huber delta must be positive")
    diff = np.asarray(pred, dtype=np.float64) - np.asarray(target, dtype=np.float64)
    grad = np.clip(diff, -delta, delta)
    return float(grad) if grad.ndim == 0 else grad


def _check_weighting(losses: np.ndarray, weights: np.ndarray):
    if losses.shape != weights.shape:
        raise ValueError(
            f"Loss/weight length mismatch: {losses.shape[0] if losses.ndim else 0} "
            f"vs {weights.shape[0] if weights.ndim else 0}"
        )
    if np.any(weights < 0.0) or np.any(weights > 1.0):
        raise ValueError("Sample weights must lie in [0, 1]")


def weighted_mean_loss(per_sample_losses, weights) -> float:
    """Return ``(1/B) * sum(w_i * l_i)``; weights are constants."""
    losses = np.asarray(per_sample_losses, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    _check_weighting(losses, weights)
    return float(np.sum(weights * losses) / losses.shape[0])


def weighted_mean_loss_grad(weights) -> np.ndarray:
    """d(weighted mean)/d(l_i) = w_i / B."""
    weights = np.asarray(weights, dtype=np.float64)
    return weights / weights.shape[0]
