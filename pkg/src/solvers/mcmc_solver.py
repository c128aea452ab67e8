"""
Random-walk (MCMC) PageRank estimator

Three modes share one RowSampler:
  single    one walk of T steps, visit frequencies after a burn-in of T0 steps
  parallel  N independent walks from uniform starts, averaged endpoint indicators
  adaptive  one walk stopped when the lagged l2 change of the estimate is small,
            then the first ~t/5 steps are discarded via geometric checkpoints
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.errors import InvalidConfig, ZeroSteps
from src.rank_types import McmcMode, RankVector, RunStatus, StartPolicy
from src.solvers.config import McmcConfig
from src.solvers.graph_core import StochasticMatrix
from src.solvers.sampling import RngStream, RowSampler
from src.solvers.worker_pool import WorkerPool, chunked

logger = logging.getLogger(__name__)

UNIFORM_BLOCK = 1 << 16
TRAJECTORY_CHUNK = 256
FIRST_CHECKPOINT = 5
DISCARD_RATIO = 5

TraceCallback = Callable[[Dict[str, float]], None]


@dataclass
class McmcResult:
    estimate: RankVector
    visits: np.ndarray
    steps_total: int
    steps_burn: int
    trajectories: int
    wall_seconds: float
    mode: McmcMode
    status: RunStatus = RunStatus.OK
    steps_discarded: int = 0
    trace: List[Tuple[int, float]] = field(default_factory=list)

    @property
    def steps_counted(self) -> int:
        return self.steps_total - self.steps_burn - self.steps_discarded


def _ceil(value: float) -> int:
    """Ceiling that ignores floating noise around exact integers"""
    nearest = round(value)
    if abs(value - nearest) <= 1e-9 * max(1.0, abs(value)):
        return int(nearest)
    return int(math.ceil(value))


def _check_eps_sigma(eps: float, sigma: float):
    if not eps > 0:
        raise InvalidConfig(f"eps must be positive, got {eps}")
    if not (0 < sigma <= 1):
        raise InvalidConfig(f"sigma must lie in (0, 1], got {sigma}")


def burn_in_steps(cfg: McmcConfig, n: int, eps: Optional[float] = None) -> int:
    """T0 = ceil(c_burn / alpha * ln(n / eps)), never negative"""
    if n < 1:
        raise InvalidConfig(f"n must be positive, got {n}")
    eps = cfg.eps if eps is None else eps
    if not eps > 0:
        raise InvalidConfig(f"eps must be positive, got {eps}")
    log_term = max(0.0, math.log(n / eps))
    return _ceil(cfg.c_burn * log_term / cfg.alpha)


def total_steps(cfg: McmcConfig, n: int) -> int:
    """T = ceil(c_total * ln(n / sigma) / (alpha * eps^2))"""
    if n < 1:
        raise InvalidConfig(f"n must be positive, got {n}")
    log_term = max(0.0, math.log(n / cfg.sigma))
    return _ceil(cfg.c_total * log_term / (cfg.alpha * cfg.eps * cfg.eps))


def trajectory_count(eps: float, sigma: float) -> int:
    """N = ceil((4 + 6 ln(1/sigma)) / eps^2)"""
    _check_eps_sigma(eps, sigma)
    return _ceil((4.0 + 6.0 * math.log(1.0 / sigma)) / (eps * eps))


def hoeffding_sufficient(trajectories: int, eps: float, sigma: float) -> bool:
    """eps N - sqrt(2 sqrt(2) N + eps^2 N^2 / 4) >= sqrt(4 N ln(1/sigma))"""
    _check_eps_sigma(eps, sigma)
    n_traj = float(trajectories)
    lhs = eps * n_traj - math.sqrt(2.0 * math.sqrt(2.0) * n_traj + eps * eps * n_traj * n_traj / 4.0)
    rhs = math.sqrt(4.0 * n_traj * math.log(1.0 / sigma))
    return lhs >= rhs


def sufficient_trajectory_count(eps: float, sigma: float) -> int:
    """Smallest N satisfying hoeffding_sufficient (the condition is monotone in N)"""
    _check_eps_sigma(eps, sigma)
    hi = max(1, trajectory_count(eps, sigma))
    while not hoeffding_sufficient(hi, eps, sigma):
        hi *= 2
    lo = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if hoeffding_sufficient(mid, eps, sigma):
            hi = mid
        else:
            lo = mid
    return hi


def predicted_operations(n: int, eps: float, sigma: float, alpha: float) -> int:
    """n + ln n * ln(n / sigma) / (alpha eps^2)"""
    _check_eps_sigma(eps, sigma)
    return _ceil(n + math.log(max(n, 1)) * max(0.0, math.log(n / sigma)) / (alpha * eps * eps))


def _start_node(cfg: McmcConfig, n: int, rng: RngStream) -> int:
    if cfg.start is StartPolicy.UNIFORM_RANDOM:
        return rng.node(n)
    return 0


def _walk_counts(sampler: RowSampler, start: int, steps: int, skip: int,
                 rng: RngStream) -> List[int]:
    """Visit counts of states x_{skip+1}..x_steps of a walk with x_1 = start"""
    visits = [0] * sampler.n
    state = start
    step = sampler.step
    t = 0
    while t < steps:
        block = rng.uniforms(min(UNIFORM_BLOCK, steps - t)).tolist()
        for u in block:
            t += 1
            if t > skip:
                visits[state] += 1
            state = step(state, u)
    return visits


def run_single(matrix: StochasticMatrix, cfg: McmcConfig, seed: int) -> McmcResult:
    """One walk of T steps; the first T0 visited states are not counted"""
    n = matrix.n
    steps = total_steps(cfg, n)
    burn = cfg.burn_in if cfg.burn_in is not None else burn_in_steps(cfg, n)
    if steps <= burn:
        raise ZeroSteps(f"total steps {steps} do not exceed burn-in {burn}")

    started = time.perf_counter()
    rng = RngStream(seed, 0)
    sampler = RowSampler(matrix)
    start = _start_node(cfg, n, rng)
    logger.info(f"MCMC single: n={n}, T={steps}, T0={burn}, start={start}")

    visits = np.asarray(_walk_counts(sampler, start, steps, burn, rng), dtype=np.int64)
    estimate = RankVector.from_array(visits / float(steps - burn))

    return McmcResult(
        estimate=estimate,
        visits=visits,
        steps_total=steps,
        steps_burn=burn,
        trajectories=1,
        wall_seconds=time.perf_counter() - started,
        mode=McmcMode.SINGLE,
    )


def _endpoints(sampler: RowSampler, seed: int, burn: int, indices: range) -> List[int]:
    out = []
    n = sampler.n
    for k in indices:
        rng = RngStream(seed, k)
        start = rng.node(n)
        out.append(sampler.walk(start, rng.uniforms(burn).tolist()) if burn else start)
    return out


def run_parallel(matrix: StochasticMatrix, cfg: McmcConfig, seed: int,
                 workers: Optional[int] = 1) -> McmcResult:
    """Average of endpoint indicators of N independent walks of T0(eps/2) steps"""
    n = matrix.n
    count = cfg.trajectories if cfg.trajectories is not None else trajectory_count(cfg.eps, cfg.sigma)
    burn = cfg.burn_in if cfg.burn_in is not None else burn_in_steps(cfg, n, eps=cfg.eps / 2.0)

    started = time.perf_counter()
    sampler = RowSampler(matrix)
    logger.info(f"MCMC parallel: n={n}, N={count}, T0={burn}, workers={workers or 1}")

    with WorkerPool(workers) as pool:
        chunks = pool.map_ordered(
            lambda indices: _endpoints(sampler, seed, burn, indices),
            chunked(count, TRAJECTORY_CHUNK),
        )

    endpoints = np.fromiter((e for chunk in chunks for e in chunk), dtype=np.int64, count=count)
    visits = np.bincount(endpoints, minlength=n).astype(np.int64)
    estimate = RankVector.from_array(visits / float(count))

    return McmcResult(
        estimate=estimate,
        visits=visits,
        steps_total=count * burn,
        steps_burn=0,
        trajectories=count,
        wall_seconds=time.perf_counter() - started,
        mode=McmcMode.PARALLEL,
    )


def run_adaptive(matrix: StochasticMatrix, cfg: McmcConfig, seed: int,
                 trace_callback: Optional[TraceCallback] = None) -> McmcResult:
    """Stop on ||p_t - p_{t-tau}||_2 <= tol_adapt, then drop roughly the first t/5 steps"""
    n = matrix.n
    max_steps = cfg.max_steps if cfg.max_steps is not None else total_steps(cfg, n)
    tau = cfg.tau

    started = time.perf_counter()
    rng = RngStream(seed, 0)
    sampler = RowSampler(matrix)
    state = _start_node(cfg, n, rng)
    logger.info(f"MCMC adaptive: n={n}, tau={tau}, tol={cfg.tol_adapt}, max_steps={max_steps}")

    visits = np.zeros(n, dtype=np.int64)
    lagged = np.zeros(n)
    lagged[state] = 1.0
    snapshots: Dict[int, np.ndarray] = {}
    next_checkpoint = FIRST_CHECKPOINT
    trace: List[Tuple[int, float]] = []
    status = RunStatus.MAX_STEPS_EXCEEDED

    step = sampler.step
    t = 0
    block: List[float] = []
    position = 0
    while t < max_steps:
        if position == len(block):
            block = rng.uniforms(UNIFORM_BLOCK).tolist()
            position = 0
        t += 1
        visits[state] += 1
        state = step(state, block[position])
        position += 1

        if t == next_checkpoint:
            snapshots[t] = visits.copy()
            next_checkpoint *= 2
            # keep the largest checkpoint <= t/5 and everything after it
            eligible = [c for c in snapshots if c * DISCARD_RATIO <= t]
            for c in eligible[:-1]:
                del snapshots[c]

        if t % tau == 0:
            current = visits / float(t)
            diff = float(np.sqrt(np.sum((current - lagged) ** 2)))
            trace.append((t, diff))
            if trace_callback is not None:
                trace_callback({'step': t, 'l2_lag_diff': diff})
            logger.debug(f"step {t}: lagged l2 difference {diff:.3e}")
            lagged = current
            if diff <= cfg.tol_adapt:
                status = RunStatus.OK
                break

    discarded = max((c for c in snapshots if c * DISCARD_RATIO <= t), default=0)
    counted = visits - snapshots[discarded] if discarded else visits
    estimate = RankVector.from_array(counted / float(t - discarded))

    if status is RunStatus.MAX_STEPS_EXCEEDED:
        logger.warning(f"Adaptive MCMC hit max_steps={max_steps} before tol {cfg.tol_adapt}")
    else:
        logger.info(f"Adaptive MCMC stopped at t={t}, discarding the first {discarded} steps")

    return McmcResult(
        estimate=estimate,
        visits=counted,
        steps_total=t,
        steps_burn=0,
        trajectories=1,
        wall_seconds=time.perf_counter() - started,
        mode=McmcMode.ADAPTIVE,
        status=status,
        steps_discarded=discarded,
        trace=trace,
    )


def run(matrix: StochasticMatrix, cfg: McmcConfig, seed: int, workers: Optional[int] = 1,
        trace_callback: Optional[TraceCallback] = None) -> McmcResult:
    if cfg.mode is McmcMode.PARALLEL:
        return run_parallel(matrix, cfg, seed, workers=workers)
    if cfg.mode is McmcMode.ADAPTIVE:
        return run_adaptive(matrix, cfg, seed, trace_callback=trace_callback)
    return run_single(matrix, cfg, seed)
