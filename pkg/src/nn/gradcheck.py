"""Central finite-difference gradients for checking backward passes."""

from typing import Callable

import numpy as np

from src.nn.tensor import Tensor


def numerical_gradient(loss_fn: Callable[[], float], tensor: Tensor, h: float = 1e-5) -> np.ndarray:
    """Estimate d(loss_fn)/d(tensor) by perturbing each entry in place."""
    grad = np.zeros_like(tensor.data)
    flat = tensor.data.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        plus = loss_fn()
        flat[i] = original - h
        minus = loss_fn()
        flat[i] = original
        out[i] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    """Max elementwise |a - n| / max(|a| + |n|, floor)."""
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))
