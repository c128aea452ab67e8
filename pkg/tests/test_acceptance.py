"""
End-to-end statistical checks at desk scale

The full-size runs are marked slow (`pytest -m slow`); the default run uses
smaller versions with the same thresholds.
"""
import math

import numpy as np
import pytest

from src.errors import ZeroMass
from src.rank_types import GraphModel, McmcMode
from src.solvers import mcmc_solver
from src.solvers.baseline_oracle import power_iteration
from src.solvers.config import GkConfig, McmcConfig, build_config
from src.solvers.gk_solver import GkSolver, gk_run, iteration_count, potential
from src.solvers.graph_core import from_edge_list
from src.solvers.metrics import distance
from src.solvers.sampling import RngStream, tree_build
from src.bench.generators import generate
from tests.conftest import sparse_instance


def gk_successes(matrix, eps: float, sigma: float, seeds) -> tuple:
    cfg = build_config(GkConfig, {'eps': eps, 'sigma': sigma})
    successes, masses, iterations = 0, [], set()
    for seed in seeds:
        try:
            result = gk_run(matrix, cfg, seed)
        except ZeroMass:
            continue
        iterations.add(result.iterations)
        if result.objective <= eps:
            successes += 1
            masses.append(result.mass)
    return successes, masses, iterations


def mcmc_successes(matrix, seeds, eps: float = 0.1) -> int:
    cfg = build_config(McmcConfig, {'eps': eps, 'sigma': 0.1, 'alpha': 0.15, 'mode': McmcMode.PARALLEL})
    oracle = power_iteration(matrix, tol=1e-12).estimate
    hits = 0
    for seed in seeds:
        result = mcmc_solver.run_parallel(matrix, cfg, seed, workers=2)
        assert result.trajectories == 1782
        hits += distance(result.estimate, oracle) <= eps
    return hits


class TestGkGuarantee:
    def test_small_instance(self):
        matrix = sparse_instance(20, 4, seed=1)
        successes, masses, iterations = gk_successes(matrix, 0.1, 0.1, range(5))
        assert successes >= 4
        assert iterations == {iteration_count(20, 0.1, 0.1)}
        assert min(masses) >= 0.5 - 0.1

    @pytest.mark.slow
    def test_full_regime(self):
        matrix = sparse_instance(50, 4, seed=1)
        successes, masses, iterations = gk_successes(matrix, 0.05, 0.1, range(100))
        assert successes >= 90
        assert iterations == {math.ceil(12 * (math.log(101) + math.log(10)) / 0.0025)}
        assert min(masses) >= 0.5 - 0.05

    def test_repeat_is_bit_identical(self):
        matrix = sparse_instance(20, 4, seed=1)
        cfg = build_config(GkConfig, {'eps': 0.2, 'sigma': 0.1})
        a, b = gk_run(matrix, cfg, 42), gk_run(matrix, cfg, 42)
        np.testing.assert_array_equal(a.estimate.values, b.estimate.values)


def test_potential_stays_under_markov_bound():
    n, eps = 10, 0.3
    matrix = sparse_instance(n, 3, seed=0)
    cfg = build_config(GkConfig, {'eps': eps, 'sigma': 0.1})
    held = total = 0
    for seed in range(10):
        solver = GkSolver(matrix, cfg, seed)
        for t in range(1, 1001):
            solver.step()
            if t % 10 == 0:
                total += 1
                held += potential(solver.state) <= math.log(2 * n + 1) + t * eps * eps / 6.0 + 3.0
    assert held >= 0.95 * total


class TestMcmcParallelGuarantee:
    def test_cycle_small(self, teleport_cycle3):
        assert mcmc_successes(teleport_cycle3, range(10)) >= 8

    @pytest.mark.slow
    def test_cycle(self, teleport_cycle3):
        assert mcmc_successes(teleport_cycle3, range(50)) >= 45

    @pytest.mark.slow
    def test_uniform_sparse_thousand(self):
        assert mcmc_successes(sparse_instance(1000, 5, seed=2), range(50)) >= 45

    def test_repeat_is_bit_identical(self, teleport_cycle3):
        cfg = build_config(McmcConfig, {'eps': 0.1, 'sigma': 0.1, 'alpha': 0.15, 'mode': McmcMode.PARALLEL})
        a = mcmc_solver.run_parallel(teleport_cycle3, cfg, 5, workers=1)
        b = mcmc_solver.run_parallel(teleport_cycle3, cfg, 5, workers=3)
        np.testing.assert_array_equal(a.estimate.values, b.estimate.values)


@pytest.mark.slow
def test_sampler_fidelity_million_draws():
    tree = tree_build([1, 2, 3, 4])
    rng = RngStream(7)
    counts = np.bincount([tree.sample(rng) for _ in range(10**6)], minlength=4)
    np.testing.assert_allclose(counts / 1e6, [0.1, 0.2, 0.3, 0.4], atol=0.005)


def mean_sparse_writes(n: int, s: int = 5, iterations: int = 2000) -> float:
    matrix = from_edge_list(generate(GraphModel.UNIFORM_SPARSE, n, s, seed=n))
    cfg = build_config(GkConfig, {'eps': 0.1, 'sigma': 0.1})
    solver = GkSolver(matrix, cfg, seed=1)
    for _ in range(iterations):
        solver.step()
    levels = math.ceil(math.log2(2 * n + 1)) + 1
    mean = float(np.mean(solver.writes_sparse))
    assert mean <= (2 * s + 3) * levels
    assert max(solver.writes_sparse) <= (2 * matrix.max_degree + 3) * levels
    return mean


def test_gk_work_grows_logarithmically():
    sizes = (100, 1000, 10000)
    means = [mean_sparse_writes(n) for n in sizes]
    for (small, a), (large, b) in zip(zip(sizes, means), zip(sizes[1:], means[1:])):
        assert b / a <= 1.5 * math.log2(large) / math.log2(small)
