"""Layer kinds: Linear, ReLU, Sigmoid.

Each layer caches what its backward pass needs during ``forward`` and
consumes that cache in ``backward``. ``forward(..., cache=False)`` is the
inference path and leaves existing caches untouched.
"""

from typing import List, Optional

import numpy as np
from scipy.special import expit

from src.nn.tensor import Tensor

# Keeps Sigmoid strictly inside (0, 1) in float64.
SIGMOID_FLOOR = 1e-12


class Layer:
    """Base class for all layers."""

    kind = "Layer"

    def __init__(self):
        self._cache = None

    @property
    def in_dim(self) -> Optional[int]:
        return None

    @property
    def out_dim(self) -> Optional[int]:
        return None

    def params(self) -> List[Tensor]:
        return []

    def has_cache(self) -> bool:
        return self._cache is not None

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Linear(Layer):
    """Fully connected layer computing ``x @ W + b``.

    Args:
        fan_in: Input width
        fan_out: Output width
        rng: Generator used for He-style uniform initialization
        zero_init: Start with all-zero weights (screener output layer)
    """

    kind = "Linear"

    def __init__(self, fan_in: int, fan_out: int, rng: Optional[np.random.Generator] = None,
                 zero_init: bool = False):
        super().__init__()
        if zero_init or rng is None:
            weight = np.zeros((fan_in, fan_out))
        else:
            limit = np.sqrt(6.0 / fan_in)
            weight = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        self.weight = Tensor(weight, name="weight")
        self.bias = Tensor(np.zeros(fan_out), name="bias")

    @property
    def in_dim(self) -> int:
        return self.weight.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[1]

    def params(self) -> List[Tensor]:
        return [self.weight, self.bias]

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        if cache:
            self._cache = x
        return x @ self.weight.data + self.bias.data

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        x = self._cache
        self.weight.accumulate(x.T @ grad_out)
        self.bias.accumulate(grad_out.sum(axis=0))
        return grad_out @ self.weight.data.T


class ReLU(Layer):
    kind = "ReLU"

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        if cache:
            self._cache = x > 0
        return np.maximum(x, 0.0)

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        return grad_out * self._cache


class Sigmoid(Layer):
    kind = "Sigmoid"

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        out = np.clip(expit(x), SIGMOID_FLOOR, 1.0 - SIGMOID_FLOOR)
        if cache:
            self._cache = out
        return out

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        out = self._cache
        return grad_out * out * (1.0 - out)
