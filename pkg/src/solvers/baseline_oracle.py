"""
Deterministic ground truth: sparse power iteration and a dense direct solve
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from src.errors import DimensionTooLarge, InvalidConfig, SingularSystem
from src.rank_types import RankVector, RunStatus
from src.solvers.graph_core import DENSE_LIMIT, StochasticMatrix, transpose_apply

logger = logging.getLogger(__name__)

PIVOT_RTOL = 1e-12
DENSE_RESIDUAL_TOL = 1e-10


@dataclass
class PowerResult:
    estimate: RankVector
    iterations: int
    status: RunStatus
    trace: List[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status is RunStatus.OK


def power_iteration(matrix: StochasticMatrix, tol: float = 1e-12,
                    max_iter: int = 10000) -> PowerResult:
    """p <- P^T p from the uniform vector until the l1 step is at most tol"""
    if not tol > 0:
        raise InvalidConfig(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise InvalidConfig(f"max_iter must be at least 1, got {max_iter}")

    n = matrix.n
    p = np.full(n, 1.0 / n)
    trace: List[float] = []
    status = RunStatus.NOT_CONVERGED

    for iteration in range(1, max_iter + 1):
        nxt = transpose_apply(matrix, p)
        np.maximum(nxt, 0.0, out=nxt)
        nxt /= nxt.sum()
        step = float(np.abs(nxt - p).sum())
        trace.append(step)
        p = nxt
        if step <= tol:
            status = RunStatus.OK
            break

    if status is RunStatus.OK:
        logger.debug(f"Power iteration converged after {iteration} iterations (step {step:.3e})")
    else:
        logger.warning(f"Power iteration did not reach tol={tol} in {max_iter} iterations (last step {step:.3e})")

    return PowerResult(RankVector.from_array(p), iteration, status, trace)


def gauss_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b by Gaussian elimination with partial pivoting (a, b are overwritten)"""
    n = b.size
    threshold = PIVOT_RTOL * max(float(np.abs(a).max()), np.finfo(float).tiny)

    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < threshold:
            raise SingularSystem(f"pivot {a[p, k]:.3e} in column {k} below {threshold:.3e}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]

        if k + 1 < n:
            factors = a[k + 1:, k] / a[k, k]
            a[k + 1:, k:] -= np.outer(factors, a[k, k:])
            b[k + 1:] -= factors * b[k]

    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - np.dot(a[k, k + 1:], x[k + 1:])) / a[k, k]
    return x


def dense_solve(matrix: StochasticMatrix) -> RankVector:
    """Solve (P^T - I) p = 0 with the last equation replaced by sum(p) = 1"""
    n = matrix.n
    if n > DENSE_LIMIT:
        raise DimensionTooLarge(f"dense solve limited to n <= {DENSE_LIMIT}, got {n}")

    system = matrix.to_dense().T - np.eye(n)
    system[n - 1, :] = 1.0
    rhs = np.zeros(n)
    rhs[n - 1] = 1.0

    p = gauss_solve(system, rhs)
    np.maximum(p, 0.0, out=p)
    p /= p.sum()

    residual = float(np.abs(transpose_apply(matrix, p) - p).max())
    if residual > DENSE_RESIDUAL_TOL:
        raise SingularSystem(f"dense solution residual {residual:.3e} exceeds {DENSE_RESIDUAL_TOL}")

    logger.debug(f"Dense solve n={n}, residual {residual:.3e}")
    return RankVector.from_array(p)
