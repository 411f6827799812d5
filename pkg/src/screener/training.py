"""Main-network objectives and the plain / joint training steps.

The joint step follows the block-coordinate order:

1. w <- S(x)
2. y_hat <- F(x)
3. weighted error (1/B) sum w_i * l_i
4. unweighted per-sample errors l_i
5. update F on the weighted error (w held constant)
6. update S on its own objective (l_i held constant)
"""

from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from src.data.defaults import HUBER_DELTA
from src.nn.losses import (
    huber_grad,
    huber_loss,
    softmax_cross_entropy,
    softmax_cross_entropy_grad,
    weighted_mean_loss,
    weighted_mean_loss_grad,
)
from src.nn.network import Network
from src.nn.optimizers import Optimizer, optimizer_step
from src.screener.objective import WeightedBatch
from src.screener.screener import Screener


class MainObjective(Protocol):
    def losses(self, outputs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        ...

    def output_grad(self, outputs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        ...

    def screener_errors(self, outputs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        ...


class ClassificationObjective:
    """Softmax cross-entropy on integer labels."""

    def losses(self, outputs, targets):
        return softmax_cross_entropy(outputs, targets)

    def output_grad(self, outputs, targets):
        return softmax_cross_entropy_grad(outputs, targets)

    def screener_errors(self, outputs, targets):
        return self.losses(outputs, targets)


class TDObjective:
    """Huber loss between Q(s, a) and bootstrapped targets.

    Args:
        actions: Action taken in each transition
        delta: Huber threshold
    """

    def __init__(self, actions, delta: float = HUBER_DELTA):
        self.actions = np.asarray(actions, dtype=np.int64)
        self.delta = delta

    def q_taken(self, outputs):
        return outputs[np.arange(len(self.actions)), self.actions]

    def td_errors(self, outputs, targets):
        return np.asarray(targets, dtype=np.float64) - self.q_taken(outputs)

    def losses(self, outputs, targets):
        return huber_loss(self.q_taken(outputs), targets, self.delta)

    def output_grad(self, outputs, targets):
        grad = np.zeros_like(outputs)
        grad[np.arange(len(self.actions)), self.actions] = huber_grad(
            self.q_taken(outputs), targets, self.delta
        )
        return grad

    def screener_errors(self, outputs, targets):
        return np.abs(self.td_errors(outputs, targets))


@dataclass
class StepReport:
    weighted_loss: float
    screener_loss: float
    mean_weight: float
    batch: WeightedBatch


def _update_main(main: Network, main_opt: Optimizer, outputs, targets, objective: MainObjective,
                 factors: np.ndarray) -> float:
    losses = objective.losses(outputs, targets)
    weighted = weighted_mean_loss(losses, factors)
    coefficients = weighted_mean_loss_grad(factors)
    main.backward(coefficients[:, None] * objective.output_grad(outputs, targets))
    optimizer_step(main, main_opt)
    return weighted


def train_step(
    main: Network,
    main_opt: Optimizer,
    inputs,
    targets,
    objective: MainObjective,
    sample_factors: Optional[np.ndarray] = None,
) -> StepReport:
    """Main-network step without a screener.

    ``sample_factors`` carries importance-sampling weights; unit factors
    otherwise. Shares the reduction path with ``joint_train_step``.
    """
    inputs = np.atleast_2d(inputs)
    factors = np.ones(len(inputs)) if sample_factors is None else np.asarray(sample_factors, dtype=np.float64)
    outputs = main.forward(inputs)
    raw_errors = objective.screener_errors(outputs, targets)
    weighted = _update_main(main, main_opt, outputs, targets, objective, factors)
    batch = WeightedBatch(inputs, np.asarray(targets), np.ones(len(inputs)), raw_errors)
    return StepReport(weighted_loss=weighted, screener_loss=0.0, mean_weight=1.0, batch=batch)


def joint_train_step(
    main: Network,
    main_opt: Optimizer,
    screener: Screener,
    inputs,
    targets,
    objective: MainObjective,
    sample_factors: Optional[np.ndarray] = None,
) -> StepReport:
    """One block-coordinate step on the main network, then on the screener.

    Args:
        main: Main network
        main_opt: Main-network optimizer
        screener: Screener wrapper (network, optimizer, config)
        inputs: Batch inputs, fed to both networks
        targets: Labels or bootstrapped Q targets
        objective: Main-network loss
        sample_factors: Importance-sampling weights multiplied into the screener weights

    Returns:
        StepReport
    """
    inputs = np.atleast_2d(inputs)
    weights = screener.weights(inputs)
    outputs = main.forward(inputs)
    factors = weights if sample_factors is None else np.asarray(sample_factors, dtype=np.float64) * weights
    raw_errors = objective.screener_errors(outputs, targets)
    weighted = _update_main(main, main_opt, outputs, targets, objective, factors)
    s_loss = screener.update(inputs, raw_errors)
    batch = WeightedBatch(inputs, np.asarray(targets), weights, raw_errors)
    return StepReport(
        weighted_loss=weighted,
        screener_loss=s_loss,
        mean_weight=float(np.mean(weights)),
        batch=batch,
    )
