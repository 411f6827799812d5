"""SGD and Adam parameter updates."""

from typing import List, Optional

import numpy as np

from src.data.defaults import ADAM_BETAS, ADAM_EPS
from src.errors import GraphError
from src.nn.tensor import Tensor


class Optimizer:
    """Shared step bookkeeping and optional global-norm gradient clipping."""

    kind = "Optimizer"

    def __init__(self, learning_rate: float, max_grad_norm: Optional[float] = None):
        if learning_rate <= 0:
            raise ValueError("Learning rate must be positive")
        self.learning_rate = learning_rate
        self.max_grad_norm = max_grad_norm
        self.step_count = 0

    def _clip(self, grads: List[np.ndarray]) -> List[np.ndarray]:
        if not self.max_grad_norm:
            return grads
        total = np.sqrt(sum(float(np.sum(g * g)) for g in grads))
        if total <= self.max_grad_norm:
            return grads
        scale = self.max_grad_norm / (total + 1e-12)
        return [g * scale for g in grads]

    def step(self, params: List[Tensor]):
        grads = []
        for p in params:
            if p.grad is None:
                raise GraphError(f"Missing gradient for parameter {p.name or p.shape}")
            grads.append(p.grad)
        self.step_count += 1
        self._apply(params, self._clip(grads))

    def _apply(self, params: List[Tensor], grads: List[np.ndarray]):
        raise NotImplementedError


class SGD(Optimizer):
    kind = "SGD"

    def _apply(self, params, grads):
        for p, g in zip(params, grads):
            p.data -= self.learning_rate * g


class Adam(Optimizer):
    """Adam with bias-corrected moments."""

    kind = "Adam"

    def __init__(self, learning_rate: float = 1e-3, beta1: float = ADAM_BETAS[0], beta2: float = ADAM_BETAS[1],
                 eps: float = ADAM_EPS, max_grad_norm: Optional[float] = None):
        super().__init__(learning_rate, max_grad_norm)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.first_moments: Optional[List[np.ndarray]] = None
        self.second_moments: Optional[List[np.ndarray]] = None

    def _apply(self, params, grads):
        if self.first_moments is None:
            self.first_moments = [np.zeros_like(p.data) for p in params]
            self.second_moments = [np.zeros_like(p.data) for p in params]
        t = self.step_count
        correction1 = 1.0 - self.beta1 ** t
        correction2 = 1.0 - self.beta2 ** t
        for p, g, m, v in zip(params, grads, self.first_moments, self.second_moments):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / correction1
            v_hat = v / correction2
            p.data -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(kind: str, learning_rate: float, max_grad_norm: Optional[float] = None) -> Optimizer:
    if kind == "SGD":
        return SGD(learning_rate, max_grad_norm=max_grad_norm)
    if kind == "Adam":
        return Adam(learning_rate, max_grad_norm=max_grad_norm)
    raise ValueError(f"Unknown optimizer: {kind}")


def optimizer_step(net, opt: Optimizer):
    """Apply one update to ``net``'s parameters, then drop their grads.

    A second step needs a fresh backward pass.
    """
    params = net.parameters()
    opt.step(params)
    for p in params:
        p.grad = None
