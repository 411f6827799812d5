"""Array-backed binary sum tree over a power-of-two number of leaves.

Node 1 is the root; node ``i`` has children ``2i`` and ``2i + 1``; leaf ``j``
lives at node ``capacity + j``. Parents are recomputed as the exact sum of
their two children on every write, so the sum invariant holds bit-for-bit.
"""

import numpy as np


def _next_power_of_two(n: int) -> int:
    size = 1
    while size < n:
        size *= 2
    return size


class SumTree:
    """Prefix-sum index supporting O(log N) update and proportional lookup.

    Args:
        capacity: Minimum number of leaves; rounded up to a power of two
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("SumTree capacity must be at least 1")
        self.capacity = _next_power_of_two(capacity)
        self.depth = self.capacity.bit_length() - 1
        self.nodes = np.zeros(2 * self.capacity, dtype=np.float64)
        self.size = 0

    @property
    def total(self) -> float:
        return float(self.nodes[1])

    def leaf(self, index: int) -> float:
        return float(self.nodes[self.capacity + index])

    def leaves(self) -> np.ndarray:
        return self.nodes[self.capacity:]

    def update(self, index: int, value: float):
        if not 0 <= index < self.capacity:
            raise IndexError(f"Leaf index {index} outside [0, {self.capacity})")
        if value < 0 or not np.isfinite(value):
            raise ValueError(f"Leaf values must be finite and non-negative, got {value}")
        node = self.capacity + index
        self.nodes[node] = value
        node //= 2
        while node >= 1:
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1]
            node //= 2
        self.size = max(self.size, index + 1)

    def find_many(self, masses) -> np.ndarray:
        """Leaf indices whose cumulative interval [c_{j-1}, c_j) contains each mass."""
        masses = np.array(masses, dtype=np.float64, ndmin=1)
        total = self.total
        if total <= 0:
            raise ValueError("Cannot look up mass in an empty tree")
        if np.any(masses < 0) or np.any(masses >= total):
            raise ValueError(f"Mass must lie in [0, {total})")
        nodes = np.ones(len(masses), dtype=np.int64)
        for _ in range(self.depth):
            left = 2 * nodes
            left_sum = self.nodes[left]
            # Rounding can push a mass past the left sum into an empty right subtree.
            go_right = (masses >= left_sum) & (self.nodes[left + 1] > 0)
            masses = np.where(go_right, masses - left_sum, masses)
            nodes = np.where(go_right, left + 1, left)
        return nodes - self.capacity

    def find(self, mass: float) -> int:
        return int(self.find_many([mass])[0])


def tree_lookup(tree: SumTree, mass: float) -> int:
    return tree.find(mass)
