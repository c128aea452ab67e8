"""
Type definitions and enums for the rankwalk PageRank solvers.

Enums keep option strings (CLI flags, YAML job configs, report fields) consistent
across the code base; RankVector is the shared dense simplex vector.
"""

from enum import Enum
from typing import List, Set, Tuple
from dataclasses import dataclass

import numpy as np

from src.errors import NotOnSimplex


SIMPLEX_SUM_TOL = 1e-9


class DanglingPolicy(Enum):
    """How a row with no outgoing edges is completed"""

    UNIFORM = "uniform"
    SELF_LOOP = "self_loop"


class DampingMode(Enum):
    """Convex combination used to damp the link matrix"""

    LAZY = "lazy"          # (1-d) I + d P~
    TELEPORT = "teleport"  # (1-d) 11^T/n + d P~, rank-one part kept implicit


class McmcMode(Enum):
    SINGLE = "single"
    PARALLEL = "parallel"
    ADAPTIVE = "adaptive"


class StartPolicy(Enum):
    NODE_1 = "node_1"
    UNIFORM_RANDOM = "uniform_random"


class CountRule(Enum):
    """Which iteration count the game solver uses"""

    STANDARD = "standard"  # 12 (ln(2n+1) + ln 1/sigma) / eps^2
    TIGHT = "tight"        # 3 (ln(2n+1) + ln 1/sigma) / eps^2


class NormKind(Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"


class GraphModel(Enum):
    CYCLE = "cycle"
    STAR = "star"
    UNIFORM_SPARSE = "uniform_sparse"
    PREFERENTIAL = "preferential"

    @classmethod
    def get_sparse_models(cls) -> Set['GraphModel']:
        """Models that take an out-degree parameter s"""
        return {cls.UNIFORM_SPARSE, cls.PREFERENTIAL}


class OracleKind(Enum):
    DENSE = "dense"
    POWER = "power"


class RunStatus(Enum):
    OK = "ok"
    NOT_CONVERGED = "not_converged"
    MAX_STEPS_EXCEEDED = "max_steps_exceeded"

    @classmethod
    def get_partial_statuses(cls) -> Set['RunStatus']:
        """Statuses that still come with a usable (partial) result"""
        return {cls.NOT_CONVERGED, cls.MAX_STEPS_EXCEEDED}


class Algorithm(Enum):
    """Solvers reachable from the command line"""

    POWER = "power"
    MCMC = "mcmc"
    GK = "gk"
    DENSE = "dense"


@dataclass
class AlgorithmDefinition:
    """Complete definition of a solver as surfaced by the CLI"""

    algorithm: Algorithm
    description: str
    trace_columns: List[str] = None

    def __post_init__(self):
        if self.trace_columns is None:
            self.trace_columns = []


class AlgorithmRegistry:
    """Registry of all solver definitions"""

    DEFINITIONS = {
        Algorithm.POWER: AlgorithmDefinition(
            Algorithm.POWER,
            "Sparse power iteration p <- P^T p from the uniform vector",
            ['iter', 'l1_step'],
        ),
        Algorithm.DENSE: AlgorithmDefinition(
            Algorithm.DENSE,
            "Gaussian elimination on P^T - I with a normalisation row",
        ),
        Algorithm.MCMC: AlgorithmDefinition(
            Algorithm.MCMC,
            "Random-walk visit frequencies (single, parallel or adaptive)",
            ['step', 'l2_lag_diff'],
        ),
        Algorithm.GK: AlgorithmDefinition(
            Algorithm.GK,
            "Randomized multiplicative weights on the symmetrized game",
            ['iter', 'ln_phi', 'f_checkpoint'],
        ),
    }

    @classmethod
    def get_definition(cls, algorithm: Algorithm) -> AlgorithmDefinition:
        return cls.DEFINITIONS.get(algorithm)

    @classmethod
    def trace_header(cls, algorithm: Algorithm) -> List[str]:
        definition = cls.get_definition(algorithm)
        return definition.trace_columns if definition else []

    @classmethod
    def describe(cls) -> str:
        """One-line summary of every solver, used by --help"""
        return '; '.join(f"{d.algorithm.value}: {d.description}" for d in cls.DEFINITIONS.values())


@dataclass(frozen=True, eq=False)
class RankVector:
    """Dense probability vector on the unit simplex"""

    values: np.ndarray

    @classmethod
    def from_array(cls, values, tol: float = SIMPLEX_SUM_TOL) -> 'RankVector':
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise NotOnSimplex(f"rank vector must be a non-empty 1-d array, got shape {arr.shape}")
        if np.any(arr < 0):
            raise NotOnSimplex(f"rank vector has negative entry {arr.min():.3e}")
        total = float(arr.sum())
        if abs(total - 1.0) > tol:
            raise NotOnSimplex(f"rank vector sums to {total!r}")
        arr = arr.copy()
        arr.setflags(write=False)
        return cls(arr)

    @classmethod
    def uniform(cls, n: int) -> 'RankVector':
        return cls.from_array(np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def top(self, k: int) -> List[Tuple[int, float]]:
        """Top-k (node, score) pairs, descending score, ties by ascending node"""
        order = np.lexsort((np.arange(self.n), -self.values))
        return [(int(i), float(self.values[i])) for i in order[:k]]


__all__ = [
    'DanglingPolicy',
    'DampingMode',
    'McmcMode',
    'StartPolicy',
    'CountRule',
    'NormKind',
    'GraphModel',
    'OracleKind',
    'RunStatus',
    'Algorithm',
    'AlgorithmDefinition',
    'AlgorithmRegistry',
    'RankVector',
]
