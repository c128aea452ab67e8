"""
Seeded synthetic graph models for benchmarks
"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from src.errors import InvalidParams
from src.rank_types import GraphModel
from src.solvers.graph_core import AdjacencyGraph
from src.solvers.sampling import RngStream

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def cycle_edges(n: int) -> List[Edge]:
    if n == 1:
        return [(0, 0)]
    return [(i, (i + 1) % n) for i in range(n)]


def star_edges(n: int) -> List[Edge]:
    """Every leaf points at the hub 0 and the hub points back at every leaf"""
    if n == 1:
        return [(0, 0)]
    return [(i, 0) for i in range(1, n)] + [(0, i) for i in range(1, n)]


def uniform_sparse_edges(n: int, s: int, rng: RngStream) -> List[Edge]:
    """s distinct uniform targets per node, no self-loops"""
    gen = rng.generator
    edges: List[Edge] = []
    for i in range(n):
        targets = gen.choice(n - 1, size=s, replace=False)
        targets = np.where(targets >= i, targets + 1, targets)
        edges.extend((i, int(t)) for t in np.sort(targets))
    return edges


def preferential_edges(n: int, s: int, rng: RngStream) -> List[Edge]:
    """
    Sequential attachment starting from a complete digraph on s+1 nodes

    Each later node emits s edges to distinct earlier nodes drawn with
    probability proportional to in-degree + 1, so every out-degree is s.
    """
    gen = rng.generator
    seed_size = s + 1
    edges: List[Edge] = [(i, j) for i in range(seed_size) for j in range(seed_size) if i != j]
    in_degree = np.zeros(n, dtype=np.float64)
    in_degree[:seed_size] = s

    for i in range(seed_size, n):
        weights = in_degree[:i] + 1.0
        targets = np.sort(gen.choice(i, size=s, replace=False, p=weights / weights.sum()))
        edges.extend((i, int(t)) for t in targets)
        in_degree[targets] += 1.0
    return edges


def generate(model: GraphModel, n: int, s: Optional[int] = None, seed: int = 0) -> AdjacencyGraph:
    """Build a graph from a named model; identical (model, n, s, seed) give identical graphs"""
    model = GraphModel(model)
    if n < 1:
        raise InvalidParams(f"n must be at least 1, got {n}")

    if model in GraphModel.get_sparse_models():
        if s is None or s < 1:
            raise InvalidParams(f"model '{model.value}' needs s >= 1, got {s}")
        if s >= n:
            raise InvalidParams(f"model '{model.value}' needs s < n, got s={s}, n={n}")
        rng = RngStream(seed, 0)
        if model is GraphModel.UNIFORM_SPARSE:
            edges = uniform_sparse_edges(n, s, rng)
        else:
            edges = preferential_edges(n, s, rng)
    elif model is GraphModel.CYCLE:
        edges = cycle_edges(n)
    else:
        edges = star_edges(n)

    logger.info(f"Generated {model.value} graph: n={n}, edges={len(edges)}, seed={seed}")
    return AdjacencyGraph(n, edges)
