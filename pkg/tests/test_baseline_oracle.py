import numpy as np
import pytest

from src.errors import DimensionTooLarge, InvalidConfig, SingularSystem
from src.rank_types import RunStatus
from src.solvers.baseline_oracle import dense_solve, gauss_solve, power_iteration
from src.solvers.graph_core import from_edge_list, transpose_apply
from tests.conftest import dense_matrix, half_dangling, sparse_instance, teleport


class TestPowerIteration:
    def test_rank_one_converges_immediately(self, half_matrix):
        result = power_iteration(half_matrix)
        assert result.iterations == 1
        assert result.converged
        np.testing.assert_allclose(result.estimate.values, [0.5, 0.5])

    def test_two_state_chain(self, two_state_chain):
        result = power_iteration(two_state_chain, tol=1e-13)
        p = result.estimate.values
        np.testing.assert_allclose(p, [5 / 6, 1 / 6], atol=1e-12)
        assert 0.1 * p[0] == pytest.approx(0.5 * p[1], abs=1e-12)

    def test_teleport_cycle_is_uniform(self, teleport_cycle3):
        result = power_iteration(teleport_cycle3)
        np.testing.assert_allclose(result.estimate.values, np.full(3, 1 / 3), atol=1e-12)

    def test_not_converged_returns_last_iterate(self, two_state_chain):
        result = power_iteration(two_state_chain, max_iter=2)
        assert result.status is RunStatus.NOT_CONVERGED
        assert result.iterations == 2
        assert len(result.trace) == 2
        assert result.estimate.values.sum() == pytest.approx(1.0)

    def test_step_trace_shrinks_under_teleport(self):
        result = power_iteration(sparse_instance(50, 4, seed=2), tol=1e-12)
        assert result.converged
        assert result.trace[-1] <= 1e-12
        assert result.trace[-1] < result.trace[0]

    @pytest.mark.parametrize('tol,max_iter', [(0.0, 10), (1e-8, 0)])
    def test_invalid_arguments(self, half_matrix, tol, max_iter):
        with pytest.raises(InvalidConfig):
            power_iteration(half_matrix, tol=tol, max_iter=max_iter)


class TestDenseSolve:
    def test_two_state_chain(self, two_state_chain):
        np.testing.assert_allclose(dense_solve(two_state_chain).values, [5 / 6, 1 / 6], atol=1e-14)

    def test_identity_is_singular(self, identity2):
        with pytest.raises(SingularSystem):
            dense_solve(identity2)

    def test_dimension_guard(self):
        with pytest.raises(DimensionTooLarge):
            dense_solve(dense_matrix(np.eye(2001)))

    def test_residual_and_simplex(self, random_damped10):
        p = dense_solve(random_damped10).values
        assert np.abs(transpose_apply(random_damped10, p) - p).max() <= 1e-10
        assert p.min() >= 0.0
        assert p.sum() == pytest.approx(1.0)

    @pytest.mark.parametrize('seed', range(20))
    def test_agrees_with_power_iteration(self, seed):
        n = (10, 50, 200)[seed % 3]
        matrix = sparse_instance(n, 4, seed=100 + seed)
        power = power_iteration(matrix, tol=1e-12)
        assert power.converged
        assert np.abs(dense_solve(matrix).values - power.estimate.values).max() <= 1e-9

    def test_dangling_graph_agrees_with_power_iteration(self):
        matrix = teleport(from_edge_list(half_dangling(60, 4, seed=6)))
        power = power_iteration(matrix, tol=1e-12)
        assert power.converged
        assert np.abs(dense_solve(matrix).values - power.estimate.values).max() <= 1e-9


def test_gauss_solve_pivots(rng):
    a = rng.random((6, 6))
    a[0, 0] = 0.0
    x = rng.random(6)
    b = a @ x
    np.testing.assert_allclose(gauss_solve(a.copy(), b.copy()), x, atol=1e-12)
