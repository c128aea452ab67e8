"""
Grigoriadis-Khachiyan randomized mirror descent for PageRank

The PageRank problem is symmetrized into the skew-symmetric game

        | 0     A    -e |
    G = | -A^T  0     e |      A = P^T - I,  dimension 2n+1
        | e^T  -e^T   0 |

and solved by multiplicative weights: each iteration samples a column k of G
from the weight tree, counts it, and multiplies leaf i by exp(eps * G_ik / 2).
The tree holds exp(eps U_i / 2 - shift) with U = G X, so weights are only known
up to a common factor; sampling does not care.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.errors import DimensionTooLarge, IndexOutOfRange, InvalidConfig, NotOnSimplex, ZeroMass
from src.rank_types import CountRule, RankVector, RunStatus
from src.solvers.config import GkConfig
from src.solvers.graph_core import StochasticMatrix
from src.solvers.metrics import game_objective
from src.solvers.sampling import RngStream, WeightTree
from src.solvers.validators import MatrixValidator

logger = logging.getLogger(__name__)

RESCALE_LIMIT = 1e250
DENSE_GAME_LIMIT = 200
COLUMN_CACHE_LIMIT = 1 << 22  # cached column entries

TraceCallback = Callable[[Dict[str, object]], None]


def _merge_diagonal(idx: np.ndarray, vals: np.ndarray, k: int,
                    diagonal: float) -> Tuple[np.ndarray, np.ndarray]:
    """Add `diagonal` at position k of a sorted sparse vector, dropping exact zeros"""
    pos = int(np.searchsorted(idx, k))
    if pos < idx.size and idx[pos] == k:
        vals = vals.copy()
        vals[pos] += diagonal
    else:
        idx = np.insert(idx, pos, k)
        vals = np.insert(vals, pos, diagonal)
    keep = vals != 0.0
    return idx[keep], vals[keep]


class GameOperator:
    """Implicit (2n+1)x(2n+1) skew-symmetric matrix built from P; exposes sparse columns"""

    def __init__(self, matrix: StochasticMatrix):
        self.matrix = matrix
        self.n = matrix.n
        self.dim = 2 * self.n + 1
        self._cache: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        self._cached_entries = 0

    def _block_source(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """Sorted (index, value) of column k (k < n) or row k - n of P, uniform parts included"""
        n = self.n
        if self.matrix.is_teleport or (k >= n and self.matrix.jump_mass(k - n) > 0.0):
            dense = self.matrix.dense_column(k) if k < n else self.matrix.dense_row(k - n)
            idx = np.flatnonzero(dense)
            return idx, dense[idx]
        if k < n:
            return self.matrix.completed_column(k)
        return self.matrix.row(k - n)

    def _build_column(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        n = self.n
        if k == 2 * n:
            rows = np.arange(2 * n, dtype=np.int64)
            vals = np.concatenate([np.full(n, -1.0), np.full(n, 1.0)])
            return rows, vals

        idx, vals = self._block_source(k)
        idx = np.asarray(idx, dtype=np.int64)
        if k < n:
            # rows n+i carry -A_ki = -(P_ik - [i = k])
            idx, vals = _merge_diagonal(idx, -np.asarray(vals, dtype=np.float64), k, 1.0)
            rows = np.append(idx + n, 2 * n)
            vals = np.append(vals, 1.0)
        else:
            # rows i carry A_ij = P_ji - [i = j] with j = k - n
            idx, vals = _merge_diagonal(idx, np.asarray(vals, dtype=np.float64), k - n, -1.0)
            rows = np.append(idx, 2 * n)
            vals = np.append(vals, -1.0)
        return rows, vals

    def column(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """Nonzero (rows, values) of column k, rows ascending"""
        if not (0 <= k < self.dim):
            raise IndexOutOfRange(f"column {k} outside [0, {self.dim})")
        cached = self._cache.get(k)
        if cached is not None:
            return cached
        rows, vals = self._build_column(k)
        rows.setflags(write=False)
        vals.setflags(write=False)
        if self._cached_entries + rows.size <= COLUMN_CACHE_LIMIT:
            self._cache[k] = (rows, vals)
            self._cached_entries += rows.size
        return rows, vals

    def apply(self, x: np.ndarray) -> np.ndarray:
        """G x using only the columns where x is nonzero"""
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(self.dim)
        for k in np.flatnonzero(x):
            rows, vals = self.column(int(k))
            out[rows] += x[k] * vals
        return out

    def to_dense(self) -> np.ndarray:
        if self.n > DENSE_GAME_LIMIT:
            raise DimensionTooLarge(f"dense game limited to n <= {DENSE_GAME_LIMIT}, got {self.n}")
        dense = np.zeros((self.dim, self.dim))
        for k in range(self.dim):
            rows, vals = self.column(k)
            dense[rows, k] = vals
        return dense


def symmetrize(matrix: StochasticMatrix) -> GameOperator:
    return GameOperator(matrix)


def column(op: GameOperator, k: int) -> List[Tuple[int, float]]:
    rows, vals = op.column(k)
    return [(int(r), float(v)) for r, v in zip(rows, vals)]


def iteration_count(n: int, eps: float, sigma: float,
                    rule: CountRule = CountRule.STANDARD) -> int:
    """Standard rule: ceil(12 (ln(2n+1) + ln 1/sigma) / eps^2); the tight rule uses 3"""
    if n < 1:
        raise InvalidConfig(f"n must be positive, got {n}")
    if not (0 < eps <= 1):
        raise InvalidConfig(f"eps must lie in (0, 1], got {eps}")
    if not (0 < sigma <= 1):
        raise InvalidConfig(f"sigma must lie in (0, 1], got {sigma}")
    factor = 12.0 if CountRule(rule) is CountRule.STANDARD else 3.0
    value = factor * (math.log(2 * n + 1) + math.log(1.0 / sigma)) / (eps * eps)
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, value):
        return int(nearest)
    return int(math.ceil(value))


def predicted_operations(n: int, s: int, eps: float, sigma: float) -> int:
    """n + s ln n ln(n / sigma) / eps^2"""
    return int(math.ceil(n + s * math.log(max(n, 1)) * max(0.0, math.log(n / sigma)) / (eps * eps)))


def recover_rank(x_bar) -> Tuple[RankVector, float]:
    """Middle block p' of x = (y, p', u), normalised; returns (p_hat, mass)"""
    values = x_bar.values if isinstance(x_bar, RankVector) else np.asarray(x_bar, dtype=np.float64)
    if values.ndim != 1 or values.size < 3 or values.size % 2 == 0:
        raise NotOnSimplex(f"expected a vector of odd length 2n+1, got shape {values.shape}")
    errors = MatrixValidator.validate_simplex(values)
    if errors:
        raise NotOnSimplex('; '.join(errors))

    n = (values.size - 1) // 2
    middle = np.maximum(values[n:2 * n], 0.0)
    mass = float(middle.sum())
    if mass <= 0.0:
        raise ZeroMass("middle block has zero mass; too few iterations")
    return RankVector.from_array(middle / mass), mass


def game_gap(op: GameOperator, x_bar) -> float:
    """max_i (G x)_i; the run reaches the goal G x <= eps e when this is at most eps"""
    values = x_bar.values if isinstance(x_bar, RankVector) else np.asarray(x_bar, dtype=np.float64)
    return float(op.apply(values).max())


@dataclass
class GkState:
    """Visit counts, log-weights and the weight tree after t iterations on `op`"""

    eps: float
    op: GameOperator
    counts: np.ndarray
    exponents: np.ndarray
    tree: WeightTree
    t: int = 0
    shift: float = 0.0
    rescales: int = 0

    @property
    def dim(self) -> int:
        return int(self.counts.size)

    @classmethod
    def initial(cls, op: GameOperator, eps: float) -> 'GkState':
        dim = op.dim
        return cls(
            eps=eps,
            op=op,
            counts=np.zeros(dim, dtype=np.int64),
            exponents=np.zeros(dim),
            tree=WeightTree(np.ones(dim)),
        )

    def probabilities(self) -> np.ndarray:
        leaves = self.tree.leaves()
        return leaves / leaves.sum()


def potential(state: GkState) -> float:
    """ln Phi(t) = ln(root weight) + shift"""
    return math.log(state.tree.total) + state.shift


def conditional_growth_check(state: GkState) -> float:
    """E[Phi(t+1) | state] / Phi(t) = p^T exp(eps G / 2) p, evaluated densely"""
    op = state.op
    if op.n > DENSE_GAME_LIMIT:
        raise DimensionTooLarge(f"conditional growth needs n <= {DENSE_GAME_LIMIT}, got {op.n}")
    p = state.probabilities()
    growth = np.exp(0.5 * state.eps * op.to_dense())
    return float(p @ growth @ p)


@dataclass
class GkResult:
    x_bar: RankVector
    estimate: RankVector
    mass: float
    iterations: int
    objective: float
    game_gap: float
    ln_phi: float
    seed: int
    stream_id: int
    wall_seconds: float
    writes_sparse: List[int] = field(default_factory=list)
    writes_dense: List[int] = field(default_factory=list)
    rescales: int = 0
    status: RunStatus = RunStatus.OK
    trace: List[Dict[str, object]] = field(default_factory=list)
    state: Optional[GkState] = field(default=None, repr=False)

    @property
    def mean_writes_sparse(self) -> float:
        return float(np.mean(self.writes_sparse)) if self.writes_sparse else 0.0

    @property
    def node_writes(self) -> int:
        return int(sum(self.writes_sparse) + sum(self.writes_dense))


class GkSolver:
    """Stepwise driver so diagnostics can inspect intermediate states"""

    def __init__(self, matrix: StochasticMatrix, cfg: GkConfig, seed: int, stream_id: int = 0):
        self.matrix = matrix
        self.cfg = cfg
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.op = symmetrize(matrix)
        self.rng = RngStream(seed, stream_id)
        self.state = GkState.initial(self.op, cfg.eps)
        self.half_eps = 0.5 * cfg.eps
        self.writes_sparse: List[int] = []
        self.writes_dense: List[int] = []
        self.logger = logging.getLogger(self.__class__.__name__)

    @property
    def planned_iterations(self) -> int:
        if self.cfg.max_iter is not None:
            return self.cfg.max_iter
        return iteration_count(self.matrix.n, self.cfg.eps, self.cfg.sigma, self.cfg.count_rule)

    def step(self) -> int:
        """One iteration; returns the sampled column"""
        state = self.state
        k = state.tree.sample(self.rng)
        state.counts[k] += 1
        state.t += 1

        rows, vals = self.op.column(k)
        exps = state.exponents
        exps[rows] += self.half_eps * vals
        writes = state.tree.update_many(rows, np.exp(exps[rows] - state.shift))
        if k == self.op.dim - 1:
            self.writes_dense.append(writes)
        else:
            self.writes_sparse.append(writes)

        if state.tree.total > RESCALE_LIMIT:
            self._rescale()
        return k

    def _rescale(self):
        state = self.state
        state.shift = float(state.exponents.max())
        state.tree.rebuild(np.exp(state.exponents - state.shift))
        state.rescales += 1
        self.logger.debug(f"Rescaled weight tree at t={state.t} (shift {state.shift:.3f})")

    def checkpoint(self) -> Dict[str, object]:
        state = self.state
        row: Dict[str, object] = {'iter': state.t, 'ln_phi': potential(state), 'f_checkpoint': None}
        if state.t:
            try:
                p_hat, _ = recover_rank(state.counts / float(state.t))
                row['f_checkpoint'] = game_objective(self.matrix, p_hat)
            except ZeroMass:
                pass
        return row

    def run(self, trace_callback: Optional[TraceCallback] = None) -> GkResult:
        iterations = self.planned_iterations
        trace_every = self.cfg.trace_every
        trace: List[Dict[str, object]] = []
        started = time.perf_counter()
        self.logger.info(
            f"GK: n={self.matrix.n}, dim={self.op.dim}, eps={self.cfg.eps}, "
            f"sigma={self.cfg.sigma}, T={iterations}, stream={self.stream_id}"
        )

        for _ in range(iterations):
            self.step()
            if trace_every and self.state.t % trace_every == 0:
                row = self.checkpoint()
                trace.append(row)
                if trace_callback is not None:
                    trace_callback(row)

        state = self.state
        x_bar = RankVector.from_array(state.counts / float(state.t))
        estimate, mass = recover_rank(x_bar)
        objective = game_objective(self.matrix, estimate)
        gap = game_gap(self.op, x_bar)

        self.logger.info(f"GK finished: f(p)={objective:.3e}, mass={mass:.4f}, rescales={state.rescales}")
        return GkResult(
            x_bar=x_bar,
            estimate=estimate,
            mass=mass,
            iterations=state.t,
            objective=objective,
            game_gap=gap,
            ln_phi=potential(state),
            seed=self.seed,
            stream_id=self.stream_id,
            wall_seconds=time.perf_counter() - started,
            writes_sparse=self.writes_sparse,
            writes_dense=self.writes_dense,
            rescales=state.rescales,
            trace=trace,
            state=state,
        )


def gk_run(matrix: StochasticMatrix, cfg: GkConfig, seed: int, stream_id: int = 0,
           trace_callback: Optional[TraceCallback] = None) -> GkResult:
    return GkSolver(matrix, cfg, seed, stream_id).run(trace_callback)
