"""Sliding-window replay memory with proportional prioritization.

Selection probability is ``P(i) = p_i^alpha / sum_k p_k^alpha``; the sum tree
stores ``p_i^alpha`` while raw priorities are kept alongside so ``alpha``
stays a pure sampling-time exponent. Importance-sampling weights are
``((1/N) * (1/P(i)))^beta`` divided by their batch maximum.
"""

from dataclasses import dataclass
from typing import Any, List, Optional, Sequence

import numpy as np

from src.data.defaults import (
    BATCH_SIZE,
    BETA_ANNEAL_STEPS,
    BETA_END,
    BETA_START,
    BUFFER_CAPACITY,
    PER_ALPHA,
    PER_EPSILON,
)
from src.errors import BufferUnderflowError
from src.replay.sum_tree import SumTree


def priority_from_error(error, epsilon: float = PER_EPSILON):
    """``|error| + epsilon``; scalar or vector."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    result = np.abs(np.asarray(error, dtype=np.float64)) + epsilon
    return float(result) if result.ndim == 0 else result


def priority_from_screener(weight, epsilon: float = PER_EPSILON):
    """``S(x) + epsilon`` for screener-driven sampling."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    weight = np.asarray(weight, dtype=np.float64)
    if np.any(weight <= 0.0) or np.any(weight >= 1.0):
        raise ValueError("Screener weights must lie strictly inside (0, 1)")
    result = weight + epsilon
    return float(result) if result.ndim == 0 else result


def anneal_beta(step: int, start: float = BETA_START, end: float = BETA_END,
                anneal_steps: int = BETA_ANNEAL_STEPS) -> float:
    """Linear schedule from ``start`` to ``end`` over ``anneal_steps``, then flat."""
    if step < 0:
        raise ValueError("step must be non-negative")
    if anneal_steps <= 0 or step >= anneal_steps:
        return float(end)
    # Interpolating as a weighted sum over integers keeps the endpoints and midpoint exact.
    return ((anneal_steps - step) * start + step * end) / anneal_steps


@dataclass
class SampledBatch:
    items: List[Any]
    indices: np.ndarray
    probabilities: np.ndarray
    is_weights: np.ndarray

    def __len__(self) -> int:
        return len(self.indices)


class PrioritizedBuffer:
    """Fixed-capacity FIFO memory indexed by a sum tree.

    Args:
        capacity: Maximum number of stored items; the oldest is evicted first
        alpha: Prioritization exponent (0 = uniform)
        epsilon: Added to errors so no priority is zero
        beta_start: Initial importance-sampling exponent
        beta_end: Final importance-sampling exponent
        anneal_steps: Steps over which beta is annealed
        rng: Sampling generator
    """

    def __init__(
        self,
        capacity: int = BUFFER_CAPACITY,
        alpha: float = PER_ALPHA,
        epsilon: float = PER_EPSILON,
        beta_start: float = BETA_START,
        beta_end: float = BETA_END,
        anneal_steps: int = BETA_ANNEAL_STEPS,
        rng: Optional[np.random.Generator] = None,
    ):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0.0 <= beta_start <= beta_end <= 1.0:
            raise ValueError("beta schedule must satisfy 0 <= start <= end <= 1")
        self.capacity = capacity
        self.alpha = alpha
        self.epsilon = epsilon
        self.beta_start = beta_start
        self.beta_end = beta_end
        self.anneal_steps = anneal_steps
        self.rng = rng if rng is not None else np.random.default_rng()

        self.tree = SumTree(capacity)
        self.items: List[Any] = [None] * capacity
        self.priorities = np.zeros(capacity, dtype=np.float64)
        self.cursor = 0
        self.size = 0
        self.max_priority = 1.0

    def __len__(self) -> int:
        return self.size

    def beta(self, step: int) -> float:
        return anneal_beta(step, self.beta_start, self.beta_end, self.anneal_steps)

    def _set_priority(self, index: int, priority: float):
        self.priorities[index] = priority
        self.tree.update(index, priority ** self.alpha)
        if priority > self.max_priority:
            self.max_priority = priority

    def push(self, item: Any, priority: Optional[float] = None) -> int:
        """Store ``item``; without a priority it enters at the current maximum.

        Returns:
            Slot index the item was written to
        """
        if priority is None:
            priority = self.max_priority
        if not priority > 0:
            raise ValueError(f"Priority must be positive, got {priority}")
        index = self.cursor
        self.items[index] = item
        self._set_priority(index, float(priority))
        self.cursor = (self.cursor + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        return index

    def update_priorities(self, indices: Sequence[int], new_priorities: Sequence[float]):
        indices = np.asarray(indices, dtype=np.int64)
        new_priorities = np.asarray(new_priorities, dtype=np.float64)
        if indices.shape != new_priorities.shape:
            raise ValueError("indices and priorities must have the same length")
        for index, priority in zip(indices, new_priorities):
            if not 0 <= index < self.size:
                raise IndexError(f"Index {index} outside occupied range [0, {self.size})")
            if not priority > 0:
                raise ValueError(f"Priority must be positive, got {priority}")
            self._set_priority(int(index), float(priority))

    def probabilities(self) -> np.ndarray:
        """Exact selection probability of every occupied slot."""
        masses = self.tree.leaves()[: self.size]
        return masses / self.tree.total

    def _is_weights(self, probabilities: np.ndarray, beta: float) -> np.ndarray:
        weights = (self.size * probabilities) ** (-beta)
        return weights / weights.max()

    def _gather(self, indices: np.ndarray, beta: float) -> SampledBatch:
        probabilities = self.tree.leaves()[indices] / self.tree.total
        return SampledBatch(
            items=[self.items[i] for i in indices],
            indices=indices,
            probabilities=probabilities,
            is_weights=self._is_weights(probabilities, beta),
        )

    def sample_batch(self, batch_size: int = BATCH_SIZE, beta: Optional[float] = None,
                     step: Optional[int] = None) -> SampledBatch:
        """Stratified proportional sample: one uniform draw per equal-mass segment.

        Args:
            batch_size: Number of items
            beta: IS exponent; derived from ``step`` via the schedule when omitted
            step: Training step for the beta schedule

        Returns:
            SampledBatch
        """
        if self.size < batch_size:
            raise BufferUnderflowError(f"Buffer holds {self.size} items, batch needs {batch_size}")
        if beta is None:
            beta = self.beta(step or 0)
        total = self.tree.total
        segment = total / batch_size
        masses = (np.arange(batch_size) + self.rng.random(batch_size)) * segment
        masses = np.minimum(masses, np.nextafter(total, 0.0))
        return self._gather(self.tree.find_many(masses), beta)

    def sample_independent(self, n: int, beta: float = 0.0) -> SampledBatch:
        """I.i.d. proportional draws (no stratification)."""
        if self.size < 1:
            raise BufferUnderflowError("Buffer is empty")
        total = self.tree.total
        masses = np.minimum(self.rng.random(n) * total, np.nextafter(total, 0.0))
        return self._gather(self.tree.find_many(masses), beta)

    def sample_uniform(self, batch_size: int = BATCH_SIZE) -> SampledBatch:
        """Uniform replay: indices drawn with replacement, unit IS weights."""
        if self.size < batch_size:
            raise BufferUnderflowError(f"Buffer holds {self.size} items, batch needs {batch_size}")
        indices = self.rng.integers(0, self.size, size=batch_size)
        return SampledBatch(
            items=[self.items[i] for i in indices],
            indices=indices,
            probabilities=np.full(batch_size, 1.0 / self.size),
            is_weights=np.ones(batch_size),
        )
