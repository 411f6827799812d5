"""Parameter container with gradient storage."""

from typing import Optional, Tuple

import numpy as np


class Tensor:
    """Dense float64 value with an optional gradient of identical shape.

    Activations flow between layers as plain ndarrays; ``Tensor`` is used for
    anything that owns a gradient (weights and biases).
    """

    def __init__(self, data, name: str = ""):
        self.data = np.array(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    def accumulate(self, grad: np.ndarray):
        """Add ``grad`` into the stored gradient, allocating it on first use."""
        if grad.shape != self.data.shape:
            raise ValueError(
                f"Gradient shape {grad.shape} does not match {self.name or 'tensor'} {self.data.shape}"
            )
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        return f"Tensor(name={self.name!r}, shape={self.shape})"
