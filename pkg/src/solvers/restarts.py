"""
Independent GK restarts

Runs R independent GK trajectories (same seed, stream ids 0..R-1), verifies
f(p_hat) of each with one sparse mat-vec, and keeps the smallest. A degenerate
attempt (ZeroMass) is logged and skipped; if every attempt fails the last
exception is re-raised.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Type, Union

from src.errors import InvalidConfig, ZeroMass
from src.solvers.config import GkConfig
from src.solvers.gk_solver import GkResult, TraceCallback, gk_run
from src.solvers.graph_core import StochasticMatrix
from src.solvers.worker_pool import WorkerPool

logger = logging.getLogger(__name__)

Attempt = Union[GkResult, Exception]


@dataclass
class RestartSummary:
    best: GkResult
    objectives: List[Optional[float]] = field(default_factory=list)
    failures: int = 0

    @property
    def attempts(self) -> int:
        return len(self.objectives)


def restarts_for(sigma: float) -> int:
    """~log2(1/sigma) independent runs push the failure probability of the best below sigma"""
    if not (0 < sigma < 1):
        raise InvalidConfig(f"sigma must lie in (0, 1), got {sigma}")
    return max(1, math.ceil(math.log2(1.0 / sigma)))


def run_restarts(
    matrix: StochasticMatrix,
    cfg: GkConfig,
    seed: int,
    restarts: int,
    workers: Optional[int] = 1,
    exceptions: Tuple[Type[Exception], ...] = (ZeroMass,),
    trace_callback: Optional[TraceCallback] = None,
) -> RestartSummary:
    """
    Run independent GK instances and keep the best verified one

    Args:
        matrix: Row-stochastic matrix
        cfg: GK parameters shared by every attempt
        seed: Base seed; attempt r uses stream id r
        restarts: Number of attempts (R >= 1)
        workers: Threads for the attempts
        exceptions: Failures that count as a degenerate attempt instead of aborting
        trace_callback: Receives trace rows of the first attempt only

    Returns:
        RestartSummary with the attempt of smallest f(p_hat); ties go to the lower stream id
    """
    if restarts < 1:
        raise InvalidConfig(f"restarts must be at least 1, got {restarts}")

    def attempt(stream_id: int) -> Attempt:
        callback = trace_callback if stream_id == 0 else None
        try:
            return gk_run(matrix, cfg, seed, stream_id=stream_id, trace_callback=callback)
        except exceptions as e:
            return e

    with WorkerPool(workers) as pool:
        outcomes = pool.map_ordered(attempt, range(restarts))

    best: Optional[GkResult] = None
    objectives: List[Optional[float]] = []
    last_exception: Optional[Exception] = None

    for stream_id, outcome in enumerate(outcomes):
        if isinstance(outcome, Exception):
            last_exception = outcome
            objectives.append(None)
            logger.warning(f"GK attempt {stream_id + 1}/{restarts} failed: {outcome}")
            continue
        objectives.append(outcome.objective)
        logger.debug(f"GK attempt {stream_id + 1}/{restarts}: f(p)={outcome.objective:.3e}")
        if best is None or outcome.objective < best.objective:
            best = outcome

    if best is None:
        logger.error(f"All {restarts} GK attempts failed")
        raise last_exception

    failures = sum(1 for value in objectives if value is None)
    logger.info(f"✅ Best of {restarts} GK attempts: stream {best.stream_id}, f(p)={best.objective:.3e}")
    return RestartSummary(best=best, objectives=objectives, failures=failures)
