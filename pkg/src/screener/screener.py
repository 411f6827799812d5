"""Screener network wrapper: weight prediction and its own update."""

from typing import Optional, Sequence

import numpy as np

from src.nn.layers import Sigmoid
from src.nn.network import Network, mlp
from src.nn.optimizers import Adam, Optimizer, optimizer_step
from src.screener.objective import (
    ScreenerConfig,
    blend_weights,
    l1_grad,
    screener_loss,
    screener_loss_grad,
)


def predict_weights(screener: Network, batch_inputs) -> np.ndarray:
    """One weight in (0, 1) per sample from a Sigmoid-terminated network."""
    if not screener.layers or not isinstance(screener.layers[-1], Sigmoid):
        raise ValueError("Screener network must end with a Sigmoid layer")
    if screener.output_dim != 1:
        raise ValueError(f"Screener must output one value per sample, got {screener.output_dim}")
    out = screener.predict(np.atleast_2d(batch_inputs))
    return out.reshape(-1)


class Screener:
    """Screener network bundled with its optimizer and configuration.

    Args:
        network: Sigmoid-terminated network with a single output
        optimizer: Optimizer for the screener's parameters
        config: Objective hyperparameters and hooks
    """

    def __init__(self, network: Network, optimizer: Optimizer, config: Optional[ScreenerConfig] = None):
        if not isinstance(network.layers[-1], Sigmoid):
            raise ValueError("Screener network must end with a Sigmoid layer")
        self.network = network
        self.optimizer = optimizer
        self.config = config or ScreenerConfig()
        self._previous: Optional[Network] = None

    @property
    def pinned(self) -> bool:
        return self.config.pinned_weight is not None

    def weights(self, inputs) -> np.ndarray:
        """Current sample weights, blended with the previous iterate when enabled."""
        inputs = np.atleast_2d(inputs)
        if self.pinned:
            return np.full(len(inputs), float(self.config.pinned_weight))
        current = predict_weights(self.network, inputs)
        lam = self.config.blend_lambda
        if lam > 0.0 and self._previous is not None:
            return blend_weights(predict_weights(self._previous, inputs), current, lam)
        return current

    def update(self, inputs, errors) -> float:
        """One descent step on the screener objective with ``errors`` held constant.

        Returns:
            Objective value before the step
        """
        inputs = np.atleast_2d(inputs)
        errors = np.asarray(errors, dtype=np.float64)
        if self.pinned:
            return screener_loss(self.weights(inputs), errors, self.config)

        if self.config.blend_lambda > 0.0:
            self._previous = self.network.copy()

        params = self.network.parameters()
        weights = self.network.forward(inputs).reshape(-1)
        loss = screener_loss(weights, errors, self.config, params)
        grad_w = screener_loss_grad(weights, errors, self.config)
        self.network.backward(grad_w[:, None])
        if self.config.l1_alpha > 0.0:
            for p in params:
                p.accumulate(l1_grad(p, self.config.l1_alpha))
        optimizer_step(self.network, self.optimizer)
        return loss


def build_screener(
    input_dim: int,
    hidden: Sequence[int],
    rng: np.random.Generator,
    config: Optional[ScreenerConfig] = None,
    learning_rate: float = 1e-3,
) -> Screener:
    """MLP screener with a zero-initialized output layer (every weight starts at 0.5)."""
    network = mlp([input_dim, *hidden, 1], rng, output_activation="sigmoid", zero_last=True)
    return Screener(network, Adam(learning_rate), config)
