"""Screener objective and its derivatives.

Per sample, with weight ``w`` and (capped) main-network error ``e``::

    (1 - w)^2 * e + w^2 * max(M - e, 0)

summed over the batch, plus ``alpha * sum |p|`` over the screener's
parameters. With M = 1 the surface over [0, 1]^2 is a non-negative saddle with
minima at (w, e) = (0, 0), (1, 1) and maxima at (0, 1), (1, 0): high-error
samples are pushed toward weight 1, low-error samples toward weight 0.
"""

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from src.data.defaults import BLEND_LAMBDA, ERROR_CAP, L1_ALPHA, MARGIN_M
from src.nn.tensor import Tensor


@dataclass
class ScreenerConfig:
    """Screener hyperparameters.

    Attributes:
        margin: Hinge margin M
        l1_alpha: L1 regularization strength on screener parameters
        blend_lambda: Momentum blend of previous and current screener outputs (0 = off)
        error_cap: Errors are clipped to this value before entering the objective
        pinned_weight: If set, the screener outputs this constant and never trains
    """

    margin: float = MARGIN_M
    l1_alpha: float = L1_ALPHA
    blend_lambda: float = BLEND_LAMBDA
    error_cap: float = ERROR_CAP
    pinned_weight: Optional[float] = None

    def __post_init__(self):
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.l1_alpha < 0:
            raise ValueError("l1_alpha must be non-negative")
        if not 0.0 <= self.blend_lambda <= 1.0:
            raise ValueError("blend_lambda must lie in [0, 1]")
        if self.error_cap <= 0:
            raise ValueError("error_cap must be positive")
        if self.pinned_weight is not None and not 0.0 <= self.pinned_weight <= 1.0:
            raise ValueError("pinned_weight must lie in [0, 1]")


@dataclass
class WeightedBatch:
    """One mini-batch with its screener weights and unweighted errors."""

    inputs: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    raw_errors: np.ndarray

    def __post_init__(self):
        n = len(self.inputs)
        if not (len(self.targets) == len(self.weights) == len(self.raw_errors) == n):
            raise ValueError("WeightedBatch fields must share the batch length")
        if np.any(self.weights < 0.0) or np.any(self.weights > 1.0):
            raise ValueError("Weights must lie in [0, 1]")
        if np.any(self.raw_errors < 0.0):
            raise ValueError("Raw errors must be non-negative")

    def __len__(self) -> int:
        return len(self.inputs)


def _prepare(weights, errors, error_cap: Optional[float]):
    weights = np.asarray(weights, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if weights.shape != errors.shape:
        raise ValueError("weights and errors must have the same length")
    if np.any(errors < 0.0):
        raise ValueError("Errors fed to the screener objective must be non-negative")
    if error_cap is not None:
        errors = np.minimum(errors, error_cap)
    return weights, errors


def per_sample_screener_loss(weights, errors, margin: float = MARGIN_M,
                             error_cap: Optional[float] = None) -> np.ndarray:
    """Elementwise objective without the regularizer."""
    w, e = _prepare(weights, errors, error_cap)
    return (1.0 - w) ** 2 * e + w ** 2 * np.maximum(margin - e, 0.0)


def l1_penalty(params: Optional[Iterable[Tensor]], alpha: float) -> float:
    if not params or alpha == 0.0:
        return 0.0
    return alpha * float(sum(np.abs(p.data).sum() for p in params))


def screener_loss(weights, errors, cfg: ScreenerConfig, screener_params: Optional[Iterable[Tensor]] = None) -> float:
    """Batch objective: summed per-sample terms plus the L1 term.

    Args:
        weights: Screener outputs in (0, 1)
        errors: Main-network per-sample losses (constants here)
        cfg: Screener configuration
        screener_params: Parameters entering the L1 term

    Returns:
        Objective value
    """
    per_sample = per_sample_screener_loss(weights, errors, cfg.margin, cfg.error_cap)
    return float(per_sample.sum()) + l1_penalty(screener_params, cfg.l1_alpha)


def screener_loss_grad(weights, errors, cfg: ScreenerConfig) -> np.ndarray:
    """d(objective)/d(w_x) = -2(1 - w)e + 2w max(M - e, 0).

    The hinge contributes zero at e == M.
    """
    w, e = _prepare(weights, errors, cfg.error_cap)
    return -2.0 * (1.0 - w) * e + 2.0 * w * np.maximum(cfg.margin - e, 0.0)


def l1_grad(param: Tensor, alpha: float) -> np.ndarray:
    return alpha * np.sign(param.data)


def blend_weights(old_w, new_w, lam: float) -> np.ndarray:
    """Elementwise ``lam * old + (1 - lam) * new``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    old_w = np.asarray(old_w, dtype=np.float64)
    new_w = np.asarray(new_w, dtype=np.float64)
    if old_w.shape != new_w.shape:
        raise ValueError("old and new weights must have the same length")
    return lam * old_w + (1.0 - lam) * new_w
