"""
Shared fixtures: small hand-built matrices and seeded generated graphs
"""
import numpy as np
import pytest
import scipy.sparse as sp

from src.bench.generators import generate
from src.rank_types import DampingMode, GraphModel
from src.solvers.config import DampingSpec
from src.solvers.graph_core import AdjacencyGraph, StochasticMatrix, apply_damping, from_edge_list


def dense_matrix(rows) -> StochasticMatrix:
    return StochasticMatrix.from_link(sp.csr_matrix(np.asarray(rows, dtype=np.float64)))


def teleport(matrix: StochasticMatrix, delta: float = 0.85) -> StochasticMatrix:
    return apply_damping(matrix, DampingSpec.create(delta, DampingMode.TELEPORT))


def sparse_instance(n: int, s: int, seed: int, delta: float = 0.85) -> StochasticMatrix:
    graph = generate(GraphModel.UNIFORM_SPARSE, n, s, seed)
    return teleport(from_edge_list(graph), delta)


def half_dangling(n: int, s: int, seed: int) -> AdjacencyGraph:
    """Uniform sparse graph whose upper half of the nodes has no outgoing edges"""
    graph = generate(GraphModel.UNIFORM_SPARSE, n, s, seed)
    return AdjacencyGraph(n, [(src, dst) for src, dst in graph.edges if src < n // 2])


@pytest.fixture
def swap_matrix() -> StochasticMatrix:
    return dense_matrix([[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def half_matrix() -> StochasticMatrix:
    return dense_matrix([[0.5, 0.5], [0.5, 0.5]])


@pytest.fixture
def two_state_chain() -> StochasticMatrix:
    """Stationary law (5/6, 1/6)"""
    return dense_matrix([[0.9, 0.1], [0.5, 0.5]])


@pytest.fixture
def identity2() -> StochasticMatrix:
    return dense_matrix(np.eye(2))


@pytest.fixture
def teleport_cycle3() -> StochasticMatrix:
    graph = AdjacencyGraph(3, [(0, 1), (1, 2), (2, 0)])
    return teleport(from_edge_list(graph), 0.85)


@pytest.fixture
def random_damped10() -> StochasticMatrix:
    return sparse_instance(10, 3, seed=11)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
