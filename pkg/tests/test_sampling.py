import numpy as np
import pytest

from src.errors import (
    AllZeroWeights,
    IndexOutOfRange,
    NegativeWeight,
    NonFiniteWeight,
    ZeroTotalWeight,
)
from src.rank_types import DampingMode
from src.solvers.config import DampingSpec
from src.solvers.graph_core import AdjacencyGraph, apply_damping, from_edge_list
from src.solvers.sampling import (
    RngStream,
    RowSampler,
    WeightTree,
    row_sample,
    tree_build,
    tree_sample,
    tree_update,
)


def frequencies(draw, size: int, count: int) -> np.ndarray:
    return np.bincount([draw() for _ in range(count)], minlength=size) / count


class TestRngStream:
    def test_same_seed_and_stream_repeat(self):
        a, b = RngStream(42, 3), RngStream(42, 3)
        np.testing.assert_array_equal(a.uniforms(100), b.uniforms(100))
        assert a.uniform() == b.uniform()

    def test_streams_differ(self):
        assert not np.array_equal(RngStream(42, 0).uniforms(10), RngStream(42, 1).uniforms(10))

    def test_draw_counter(self):
        rng = RngStream(1)
        rng.uniform()
        rng.uniforms(5)
        rng.node(10)
        assert rng.draws == 7

    def test_node_range(self):
        rng = RngStream(9)
        nodes = {rng.node(3) for _ in range(200)}
        assert nodes == {0, 1, 2}

    def test_spawn_matches_fresh_stream(self):
        np.testing.assert_array_equal(RngStream(5, 0).spawn(4).uniforms(8), RngStream(5, 4).uniforms(8))


class TestWeightTree:
    def test_build_uniform(self):
        tree = tree_build([1, 1, 1, 1])
        assert tree.total == 4.0
        assert tree.capacity == 4
        assert tree.is_consistent()

    def test_padding_is_massless(self):
        tree = tree_build([5])
        assert tree.capacity == 2
        assert tree.total == 5.0
        rng = RngStream(0)
        assert {tree_sample(tree, rng) for _ in range(100)} == {0}

    def test_capacity_is_next_power_of_two(self):
        assert WeightTree(np.ones(5)).capacity == 8
        assert WeightTree(np.ones(8)).capacity == 8
        assert WeightTree(np.ones(201)).depth == 8

    @pytest.mark.parametrize('weights,error', [
        ([0, 0, 0], AllZeroWeights),
        ([1, -1], NegativeWeight),
        ([1, float('nan')], NonFiniteWeight),
        ([], AllZeroWeights),
    ])
    def test_invalid_weights(self, weights, error):
        with pytest.raises(error):
            tree_build(weights)

    def test_update(self):
        tree = tree_build([1, 1, 1, 1])
        tree_update(tree, 1, 3)
        assert tree.total == 6.0
        np.testing.assert_allclose(tree.leaves() / tree.total, [1 / 6, 1 / 2, 1 / 6, 1 / 6])

    def test_update_same_weight_is_bitwise_noop(self):
        tree = tree_build([0.1, 0.7, 0.3])
        before = tree.node_values()
        tree.update(1, 0.7)
        np.testing.assert_array_equal(tree.node_values(), before)

    def test_update_errors(self):
        tree = tree_build([1, 1])
        with pytest.raises(IndexOutOfRange):
            tree.update(2, 1.0)
        with pytest.raises(NonFiniteWeight):
            tree.update(0, float('inf'))
        with pytest.raises(NegativeWeight):
            tree.update(0, -1.0)

    def test_update_writes_one_path(self):
        tree = tree_build(np.ones(64))
        assert tree.update(17, 2.0) == tree.depth + 1 == 7

    def test_random_updates_match_rebuild(self, rng):
        tree = tree_build(np.ones(64))
        for _ in range(1000):
            tree.update(int(rng.integers(64)), float(rng.random() * 10))
        fresh = tree_build(tree.leaves())
        np.testing.assert_array_equal(tree.node_values(), fresh.node_values())
        assert tree.is_consistent()

    def test_update_many_matches_single_updates(self, rng):
        batch, single = tree_build(np.ones(37)), tree_build(np.ones(37))
        for _ in range(50):
            idx = rng.choice(37, size=6, replace=False)
            vals = rng.random(6)
            batch.update_many(idx, vals)
            for i, v in zip(idx, vals):
                single.update(int(i), float(v))
        np.testing.assert_array_equal(batch.leaves(), single.leaves())
        assert batch.is_consistent()
        fresh = tree_build(batch.leaves())
        np.testing.assert_array_equal(batch.node_values(), fresh.node_values())

    def test_update_many_counts_distinct_nodes(self):
        tree = tree_build(np.ones(8))
        # leaves 0 and 1 share every ancestor
        assert tree.update_many([0, 1], [2.0, 3.0]) == 2 + 3
        assert tree.update_many([], []) == 0

    def test_degenerate_mass(self):
        tree = tree_build([0, 7, 0, 0])
        rng = RngStream(3)
        assert {tree_sample(tree, rng) for _ in range(200)} == {1}

    def test_zero_total_after_updates(self):
        tree = tree_build([1.0, 0.0])
        tree.update(0, 0.0)
        with pytest.raises(ZeroTotalWeight):
            tree.sample(RngStream(0))

    def test_intervals_partition_exactly(self, rng):
        for size in range(1, 17):
            weights = rng.integers(0, 5, size=size).astype(float)
            weights[rng.integers(size)] += 1.0
            tree = tree_build(weights)
            cursor = 0.0
            for i in range(size):
                lo, hi = tree.interval(i)
                assert lo == pytest.approx(cursor)
                assert hi - lo == pytest.approx(weights[i])
                if hi > lo:
                    assert tree.descend(lo) == i
                    assert tree.descend((lo + hi) / 2) == i
                cursor = hi
            assert cursor == pytest.approx(tree.total)

    def test_grid_enumeration_two_leaves(self):
        tree = tree_build([1, 1])
        grid = np.arange(10000) / 10000
        zeros = sum(1 for u in grid if tree.descend(u * tree.total) == 0)
        assert zeros / grid.size == pytest.approx(0.5, abs=1e-4)

    def test_sampling_frequencies(self):
        tree = tree_build([1, 2, 3, 4])
        rng = RngStream(2024)
        freq = frequencies(lambda: tree.sample(rng), 4, 200_000)
        np.testing.assert_allclose(freq, [0.1, 0.2, 0.3, 0.4], atol=0.005)


class TestRowSampler:
    def test_deterministic_row(self, swap_matrix):
        sampler = RowSampler(swap_matrix)
        rng = RngStream(0)
        assert {row_sample(sampler, 0, rng) for _ in range(50)} == {1}

    def test_cumulative_ends_at_row_sum(self, random_damped10):
        sampler = RowSampler(random_damped10)
        link_mass = 1.0 - random_damped10.teleport_mass
        for row in range(10):
            cum = sampler.cumulative(row)
            assert all(a <= b for a, b in zip(cum, cum[1:]))
            assert cum[-1] == pytest.approx(link_mass, abs=1e-12)

    def test_half_row(self, half_matrix):
        sampler = RowSampler(half_matrix)
        rng = RngStream(77)
        freq = frequencies(lambda: sampler.sample(0, rng), 2, 100_000)
        assert freq[0] == pytest.approx(0.5, abs=0.01)

    def test_teleport_row(self, teleport_cycle3):
        sampler = RowSampler(teleport_cycle3)
        rng = RngStream(78)
        freq = frequencies(lambda: sampler.sample(0, rng), 3, 100_000)
        np.testing.assert_allclose(freq, [0.05, 0.90, 0.05], atol=0.01)

    def test_dangling_row_jumps_uniformly(self):
        sampler = RowSampler(from_edge_list(AdjacencyGraph(3, [(0, 1)])))
        rng = RngStream(79)
        assert {sampler.sample(0, rng) for _ in range(50)} == {1}
        freq = frequencies(lambda: sampler.sample(2, rng), 3, 90_000)
        np.testing.assert_allclose(freq, [1 / 3] * 3, atol=0.01)
        assert sampler.cumulative(2) == []
        assert sampler.step(2, 0.999999) == 2

    def test_lazy_dangling_row(self):
        base = from_edge_list(AdjacencyGraph(3, [(0, 1)]))
        sampler = RowSampler(apply_damping(base, DampingSpec.create(0.5, DampingMode.LAZY)))
        rng = RngStream(80)
        freq = frequencies(lambda: sampler.sample(2, rng), 3, 90_000)
        np.testing.assert_allclose(freq, [1 / 6, 1 / 6, 2 / 3], atol=0.01)

    def test_row_out_of_range(self, swap_matrix):
        with pytest.raises(IndexOutOfRange):
            RowSampler(swap_matrix).sample(2, RngStream(0))

    def test_walk_consumes_one_uniform_per_step(self, swap_matrix):
        sampler = RowSampler(swap_matrix)
        assert sampler.walk(0, [0.3] * 5) == 1
        assert sampler.walk(0, [0.3] * 4) == 0
