import numpy as np
import pytest
from scipy import stats

from src.errors import BufferUnderflowError
from src.replay.prioritized_buffer import (
    PrioritizedBuffer,
    anneal_beta,
    priority_from_error,
    priority_from_screener,
)
from src.replay.sum_tree import SumTree, tree_lookup


def assert_tree_consistent(tree):
    for node in range(1, tree.capacity):
        assert abs(tree.nodes[node] - (tree.nodes[2 * node] + tree.nodes[2 * node + 1])) <= 1e-9


##### SumTree #####
def test_capacity_rounds_up_to_power_of_two():
    assert SumTree(5).capacity == 8
    assert SumTree(8).capacity == 8
    assert SumTree(1).capacity == 1


def test_lookup_intervals():
    tree = SumTree(4)
    for i, value in enumerate([1.0, 2.0, 3.0, 4.0]):
        tree.update(i, value)
    assert tree.total == 10.0
    assert tree_lookup(tree, 2.5) == 1
    assert tree_lookup(tree, 0.0) == 0
    assert tree_lookup(tree, 9.999) == 3
    assert tree_lookup(tree, 3.0) == 2
    with pytest.raises(ValueError):
        tree_lookup(tree, 10.0)


def test_lookup_on_empty_tree_raises():
    with pytest.raises(ValueError):
        SumTree(4).find(0.0)


def test_update_rejects_bad_input():
    tree = SumTree(4)
    with pytest.raises(IndexError):
        tree.update(4, 1.0)
    with pytest.raises(ValueError):
        tree.update(0, -1.0)


def test_randomized_operations_keep_sums_consistent():
    """10^4 random writes, then compare every node and 10^3 lookups against brute force."""
    rng = np.random.default_rng(0)
    tree = SumTree(100)
    for _ in range(10_000):
        tree.update(int(rng.integers(100)), float(rng.integers(1, 50)))
    assert_tree_consistent(tree)
    leaves = tree.leaves().copy()
    assert tree.total == leaves.sum()

    prefix = np.cumsum(leaves)
    for mass in rng.uniform(0, tree.total, size=1_000):
        expected = int(np.searchsorted(prefix, mass, side="right"))
        assert tree_lookup(tree, mass) == expected


##### priorities and schedule #####
def test_priority_from_error():
    assert priority_from_error(0.0, 0.01) == 0.01
    assert priority_from_error(-2.0, 0.01) == 2.01
    assert priority_from_error(1.5, 1e-6) == pytest.approx(1.500001)
    with pytest.raises(ValueError):
        priority_from_error(1.0, 0.0)


def test_priority_from_screener():
    assert priority_from_screener(0.5, 0.01) == pytest.approx(0.51)
    assert priority_from_screener(1e-9, 0.01) > 0.01
    with pytest.raises(ValueError):
        priority_from_screener(1.0, 0.01)
    with pytest.raises(ValueError):
        priority_from_screener(0.0, 0.01)


def test_beta_annealing_exact_points():
    assert anneal_beta(0) == 0.4
    assert anneal_beta(20_000) == 0.7
    assert anneal_beta(40_000) == 1.0
    assert anneal_beta(90_000) == 1.0
    betas = [anneal_beta(s) for s in range(0, 45_000, 500)]
    assert all(b1 <= b2 for b1, b2 in zip(betas, betas[1:]))
    assert min(betas) >= 0.4 and max(betas) <= 1.0


##### PrioritizedBuffer #####
def make_buffer(capacity=8, alpha=1.0, seed=0, **kwargs):
    return PrioritizedBuffer(capacity=capacity, alpha=alpha, rng=np.random.default_rng(seed), **kwargs)


def test_sliding_window_evicts_oldest():
    buffer = make_buffer(capacity=2)
    for item in (1, 2, 3):
        buffer.push(item, 1.0)
    assert len(buffer) == 2
    assert sorted(buffer.items) == [2, 3]

    buffer = make_buffer(capacity=5)
    for item in range(12):
        buffer.push(item, 1.0)
    assert sorted(buffer.items) == [7, 8, 9, 10, 11]


def test_push_updates_root():
    buffer = make_buffer(capacity=4)
    for p in (1.0, 2.0, 3.0):
        buffer.push(object(), p)
    assert buffer.tree.total == 6.0
    buffer.update_priorities([0], [5.0])
    assert buffer.tree.total == 10.0


def test_push_rejects_non_positive_priority():
    with pytest.raises(ValueError):
        make_buffer().push("x", 0.0)


def test_new_items_enter_at_max_priority():
    buffer = make_buffer(capacity=4)
    buffer.push("a", 3.0)
    buffer.push("b")
    assert buffer.priorities[1] == 3.0


def test_update_priorities():
    buffer = make_buffer(capacity=4)
    for _ in range(4):
        buffer.push("x", 1.0)
    buffer.update_priorities([2], [4.0])
    assert buffer.tree.total == 7.0
    before = buffer.tree.nodes.copy()
    buffer.update_priorities([2], [4.0])
    assert np.array_equal(before, buffer.tree.nodes)
    with pytest.raises(IndexError):
        buffer.update_priorities([4], [1.0])
    with pytest.raises(ValueError):
        buffer.update_priorities([0], [-1.0])


def test_randomized_push_update_fuzz_keeps_tree_consistent():
    rng = np.random.default_rng(4)
    buffer = make_buffer(capacity=64, alpha=0.6)
    for _ in range(10_000):
        if len(buffer) == 0 or rng.random() < 0.5:
            buffer.push(None, float(rng.uniform(0.01, 10)))
        else:
            index = int(rng.integers(len(buffer)))
            buffer.update_priorities([index], [float(rng.uniform(0.01, 10))])
    assert_tree_consistent(buffer.tree)
    assert abs(buffer.tree.total - np.sum(buffer.priorities[: len(buffer)] ** 0.6)) <= 1e-9


def test_sample_requires_enough_items():
    buffer = make_buffer()
    buffer.push("x", 1.0)
    with pytest.raises(BufferUnderflowError):
        buffer.sample_batch(2)
    with pytest.raises(BufferUnderflowError):
        buffer.sample_uniform(2)


def test_uniform_priorities_give_unit_is_weights():
    buffer = make_buffer(capacity=16)
    for i in range(16):
        buffer.push(i, 2.0)
    batch = buffer.sample_batch(8, beta=1.0)
    assert np.allclose(batch.probabilities, 1 / 16)
    assert np.array_equal(batch.is_weights, np.ones(8))


def test_is_weights_max_normalized():
    buffer = make_buffer(capacity=8, alpha=0.6)
    for p in (0.1, 5.0, 1.0, 3.0, 0.5, 2.0):
        buffer.push(None, p)
    batch = buffer.sample_batch(4, beta=0.7)
    assert batch.is_weights.max() == 1.0
    assert np.all(batch.is_weights > 0)
    zero_beta = buffer.sample_batch(4, beta=0.0)
    assert np.array_equal(zero_beta.is_weights, np.ones(4))


def test_stratified_batch_covers_every_segment():
    buffer = make_buffer(capacity=4)
    for p in (1.0, 1.0, 1.0, 1.0):
        buffer.push(None, p)
    batch = buffer.sample_batch(4, beta=0.0)
    assert sorted(batch.indices.tolist()) == [0, 1, 2, 3]


def test_priority_three_to_one_frequencies():
    buffer = make_buffer(capacity=2, alpha=1.0, seed=8)
    buffer.push("a", 3.0)
    buffer.push("b", 1.0)
    assert np.allclose(buffer.probabilities(), [0.75, 0.25])
    draws = buffer.sample_independent(100_000).indices
    assert abs(np.mean(draws == 0) - 0.75) < 0.01


@pytest.mark.parametrize("alpha", [0.0, 0.6, 1.0])
def test_sampling_law_passes_chi_square(alpha):
    rng = np.random.default_rng(21)
    priorities = rng.uniform(0.1, 5.0, size=10)
    buffer = make_buffer(capacity=10, alpha=alpha, seed=int(alpha * 10) + 1)
    for p in priorities:
        buffer.push(None, float(p))
    expected = priorities ** alpha / np.sum(priorities ** alpha)
    assert np.allclose(buffer.probabilities(), expected)

    n = 100_000
    counts = np.bincount(buffer.sample_independent(n).indices, minlength=10)
    result = stats.chisquare(counts, expected * n)
    assert result.pvalue > 0.01


def test_alpha_zero_matches_uniform_regardless_of_priorities():
    buffer = make_buffer(capacity=5, alpha=0.0)
    for p in (0.01, 1.0, 10.0, 100.0, 3.0):
        buffer.push(None, p)
    assert np.allclose(buffer.probabilities(), 0.2)
    batch = buffer.sample_batch(5, beta=0.0)
    assert np.array_equal(batch.is_weights, np.ones(5))


def test_screener_priorities_drive_sampling_law():
    """Two classes with frozen weights 0.9 and 0.1 are drawn in proportion to weight + eps."""
    eps = 0.01
    buffer = make_buffer(capacity=2, alpha=1.0, seed=13, epsilon=eps)
    buffer.push("hard", priority_from_screener(0.9, eps))
    buffer.push("easy", priority_from_screener(0.1, eps))
    draws = buffer.sample_independent(100_000).indices
    expected = (0.9 + eps) / (1.0 + 2 * eps)
    assert abs(np.mean(draws == 0) - expected) < 0.01


def test_equal_screener_weights_give_uniform_law():
    buffer = make_buffer(capacity=6, alpha=1.0)
    for _ in range(6):
        buffer.push(None, priority_from_screener(0.37))
    assert np.allclose(buffer.probabilities(), 1 / 6)


def test_uniform_sample_has_unit_weights():
    buffer = make_buffer(capacity=40)
    for i in range(10):
        buffer.push(i, float(i + 1))
    with pytest.raises(BufferUnderflowError):
        buffer.sample_uniform(32)
    for i in range(10, 40):
        buffer.push(i, float(i + 1))
    batch = buffer.sample_uniform(32)
    assert len(batch) == 32
    assert np.array_equal(batch.is_weights, np.ones(32))
    assert batch.indices.max() < 40
