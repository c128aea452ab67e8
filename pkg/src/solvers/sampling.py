"""
Seeded randomness and discrete samplers

RngStream wraps a counter-based Philox generator keyed by (seed, stream_id).
RowSampler draws the next state of a walk by inverse CDF over a row.
WeightTree is a sum tree over leaf weights with O(log n) sample and update.
"""
import logging
import math
from bisect import bisect_right
from typing import List, Sequence, Tuple

import numpy as np

from src.errors import (
    AllZeroWeights,
    IndexOutOfRange,
    NegativeWeight,
    NonFiniteWeight,
    ZeroTotalWeight,
)
from src.solvers.graph_core import StochasticMatrix
from src.solvers.validators import MatrixValidator

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


class RngStream:
    """Reproducible uniform stream; distinct stream ids give independent substreams"""

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & MASK64
        self.stream_id = int(stream_id) & MASK64
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self._generator = np.random.Generator(np.random.Philox(sequence))
        self.draws = 0

    def uniform(self) -> float:
        self.draws += 1
        return float(self._generator.random())

    def uniforms(self, size: int) -> np.ndarray:
        self.draws += int(size)
        return self._generator.random(int(size))

    def node(self, n: int) -> int:
        """Uniform index in [0, n) from a single uniform draw"""
        return min(int(self.uniform() * n), n - 1)

    @property
    def generator(self) -> np.random.Generator:
        """Underlying generator for bulk draws (not counted in `draws`)"""
        return self._generator

    def spawn(self, stream_id: int) -> 'RngStream':
        return RngStream(self.seed, stream_id)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, draws={self.draws})"


class RowSampler:
    """Inverse-CDF sampler over the rows of a StochasticMatrix"""

    def __init__(self, matrix: StochasticMatrix):
        self.n = matrix.n
        if matrix.dangling_mass is None:
            self._jump: List[float] = [matrix.teleport_mass] * self.n
        else:
            self._jump = (matrix.dangling_mass + matrix.teleport_mass).tolist()

        indptr = matrix.rows.indptr
        data = matrix.rows.data
        cumulative = np.empty_like(data)
        for row in range(self.n):
            start, end = indptr[row], indptr[row + 1]
            if end > start:
                cumulative[start:end] = np.cumsum(data[start:end])

        self._indptr: List[int] = indptr.tolist()
        self._indices: List[int] = matrix.rows.indices.tolist()
        self._cumulative: List[float] = cumulative.tolist()

    def cumulative(self, row: int) -> List[float]:
        return self._cumulative[self._indptr[row]:self._indptr[row + 1]]

    def step(self, row: int, u: float) -> int:
        """Map one uniform u in [0, 1) to the next state from `row`"""
        lo, hi = self._indptr[row], self._indptr[row + 1]
        jump = self._jump[row]
        if jump:
            if u < jump or lo == hi:
                return min(int(u / jump * self.n), self.n - 1)
            u = (u - jump) / (1.0 - jump)

        target = u * self._cumulative[hi - 1]
        k = bisect_right(self._cumulative, target, lo, hi)
        if k >= hi:
            k = hi - 1
        return self._indices[k]

    def sample(self, row: int, rng: RngStream) -> int:
        if not (0 <= row < self.n):
            raise IndexOutOfRange(f"row {row} outside [0, {self.n})")
        return self.step(row, rng.uniform())

    def walk(self, start: int, uniforms: Sequence[float]) -> int:
        """Endpoint after one transition per uniform"""
        state = start
        step = self.step
        for u in uniforms:
            state = step(state, u)
        return state


class WeightTree:
    """Balanced binary sum tree over nonnegative leaf weights (heap layout, root at 1)"""

    def __init__(self, weights: Sequence[float]):
        errors = MatrixValidator.validate_weights(weights)
        if errors:
            message = '; '.join(errors)
            if 'non-finite' in message:
                raise NonFiniteWeight(message)
            if 'negative' in message:
                raise NegativeWeight(message)
            raise AllZeroWeights(message)

        arr = np.asarray(weights, dtype=np.float64)
        if not np.any(arr > 0):
            raise AllZeroWeights("at least one weight must be positive")

        self.size = int(arr.size)
        self.capacity = max(2, 1 << (self.size - 1).bit_length())
        self.depth = self.capacity.bit_length() - 1
        self._nodes = np.zeros(2 * self.capacity, dtype=np.float64)
        self.node_writes = 0
        self.last_writes = 0
        self._fill(arr)

    def _fill(self, leaves: np.ndarray):
        cap = self.capacity
        self._nodes[:] = 0.0
        self._nodes[cap:cap + leaves.size] = leaves
        lo = cap >> 1
        while lo >= 1:
            self._nodes[lo:2 * lo] = self._nodes[2 * lo:4 * lo:2] + self._nodes[2 * lo + 1:4 * lo:2]
            lo >>= 1
        self.last_writes = 2 * cap - 1
        self.node_writes += self.last_writes

    def rebuild(self, weights: Sequence[float]):
        """Replace all leaves at once; O(capacity)"""
        arr = np.asarray(weights, dtype=np.float64)
        if arr.size != self.size:
            raise IndexOutOfRange(f"expected {self.size} weights, got {arr.size}")
        self._fill(arr)

    @property
    def total(self) -> float:
        return float(self._nodes[1])

    def leaf(self, i: int) -> float:
        return float(self._nodes[self.capacity + i])

    def leaves(self) -> np.ndarray:
        return self._nodes[self.capacity:self.capacity + self.size].copy()

    def node_values(self) -> np.ndarray:
        return self._nodes.copy()

    def _check_weight(self, w: float):
        if not math.isfinite(w):
            raise NonFiniteWeight(f"weight {w} is not finite")
        if w < 0:
            raise NegativeWeight(f"weight {w} is negative")

    def update(self, i: int, w: float) -> int:
        """Set leaf i to w and repair its ancestors; returns nodes written"""
        if not (0 <= i < self.capacity):
            raise IndexOutOfRange(f"leaf {i} outside [0, {self.capacity})")
        w = float(w)
        self._check_weight(w)

        nodes = self._nodes
        j = i + self.capacity
        nodes[j] = w
        writes = 1
        j >>= 1
        while j >= 1:
            nodes[j] = nodes[2 * j] + nodes[2 * j + 1]
            writes += 1
            j >>= 1

        self.last_writes = writes
        self.node_writes += writes
        return writes

    def update_many(self, indices, weights) -> int:
        """Set several distinct leaves, repairing each ancestor once per level"""
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            self.last_writes = 0
            return 0
        if idx.min() < 0 or idx.max() >= self.capacity:
            raise IndexOutOfRange(f"leaf index outside [0, {self.capacity})")
        vals = np.asarray(weights, dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise NonFiniteWeight("non-finite weight in batch update")
        if np.any(vals < 0):
            raise NegativeWeight("negative weight in batch update")

        nodes = self._nodes
        level = idx + self.capacity
        nodes[level] = vals
        writes = int(level.size)
        while True:
            level = np.unique(level >> 1)
            nodes[level] = nodes[2 * level] + nodes[2 * level + 1]
            writes += int(level.size)
            if level[0] == 1:
                break

        self.last_writes = writes
        self.node_writes += writes
        return writes

    def descend(self, threshold: float) -> int:
        """Leaf reached by walking `threshold` in [0, total) down the tree"""
        nodes = self._nodes
        cap = self.capacity
        j = 1
        while j < cap:
            left = nodes[2 * j]
            right = nodes[2 * j + 1]
            if (threshold < left and left > 0) or right <= 0:
                j = 2 * j
            else:
                threshold -= left
                j = 2 * j + 1
        return j - cap

    def sample(self, rng: RngStream) -> int:
        total = self._nodes[1]
        if not total > 0:
            raise ZeroTotalWeight("cannot sample from a tree with zero total weight")
        return self.descend(rng.uniform() * total)

    def interval(self, i: int) -> Tuple[float, float]:
        """[lo, hi) of thresholds that descend to leaf i"""
        if not (0 <= i < self.capacity):
            raise IndexOutOfRange(f"leaf {i} outside [0, {self.capacity})")
        nodes = self._nodes
        j = i + self.capacity
        lo = 0.0
        while j > 1:
            if j & 1:
                lo += nodes[j - 1]
            j >>= 1
        return lo, lo + nodes[i + self.capacity]

    def is_consistent(self) -> bool:
        """Every internal node equals the sum of its two children exactly"""
        nodes = self._nodes
        internal = np.arange(1, self.capacity)
        return bool(np.array_equal(nodes[internal], nodes[2 * internal] + nodes[2 * internal + 1]))


def tree_build(weights: Sequence[float]) -> WeightTree:
    return WeightTree(weights)


def tree_update(tree: WeightTree, i: int, w: float) -> WeightTree:
    tree.update(i, w)
    return tree


def tree_sample(tree: WeightTree, rng: RngStream) -> int:
    return tree.sample(rng)


def row_sample(sampler: RowSampler, row: int, rng: RngStream) -> int:
    return sampler.sample(row, rng)
