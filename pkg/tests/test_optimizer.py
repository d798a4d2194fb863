import numpy as np
import pytest

from src.application.optimizer import SwarmOptimizer, population_variance
from src.domain.entities import SolverConfig, SolverMode
from src.domain.experiment import StoppingRule
from src.domain.objectives import make_objective


@pytest.fixture
def optimizer(engine) -> SwarmOptimizer:
    return SwarmOptimizer(engine)


class TestRun:

    def test_degenerate_swarm_stalls(self, optimizer):
        obj = make_objective("ackley", 2, domain=(-3.0, 3.0))
        result = optimizer.run(obj, SolverConfig(), 5, 0, StoppingRule(n_stall=7, n_max=100), init_box=(1.0, 1.0))
        assert result.stalled
        assert result.n_iter == 7
        np.testing.assert_allclose(result.consensus, [1.0, 1.0])

    def test_budget_exhausted(self, optimizer):
        obj = make_objective("rastrigin", 3)
        result = optimizer.run(obj, SolverConfig(sigma=2.0), 10, 1, StoppingRule(n_max=12, n_stall=50))
        assert not result.stalled
        assert result.n_iter == 12

    def test_evaluation_count(self, optimizer):
        obj = make_objective("rastrigin", 3)
        result = optimizer.run(obj, SolverConfig(), 10, 1, StoppingRule(n_max=12, n_stall=50))
        assert result.n_evals == 10 + 12 * 10 + 1

    def test_deterministic(self, optimizer):
        obj = make_objective("ackley", 4, domain=(-3.0, 3.0))
        config = SolverConfig(mode=SolverMode.SDPSO_MEM, m=0.05, sigma2=2.0, nu=5.0)
        a = optimizer.run(obj, config, 20, 17, StoppingRule(n_max=100))
        b = optimizer.run(obj, config, 20, 17, StoppingRule(n_max=100))
        assert a == b

    def test_trace_records_every_step(self, optimizer):
        obj = make_objective("ackley", 2, domain=(-3.0, 3.0))
        result = optimizer.run(obj, SolverConfig(), 10, 2, StoppingRule(n_max=25, n_stall=100), trace=True)
        assert [r.step for r in result.trajectory] == list(range(26))
        assert result.trajectory[-1].consensus == result.consensus

    def test_observer_sees_every_state(self, optimizer):
        obj = make_objective("ackley", 2, domain=(-3.0, 3.0))
        seen = []
        optimizer.run(obj, SolverConfig(), 10, 2, StoppingRule(n_max=9, n_stall=100),
                      observer=lambda s: seen.append(s.step_index))
        assert seen == list(range(10))

    def test_divergence_is_reported(self, optimizer):
        obj = make_objective("ackley", 1, domain=(-3.0, 3.0))
        config = SolverConfig(m=0.0, gamma=1.0, lam=0.0, sigma=1e300)
        result = optimizer.run(obj, config, 4, 0, StoppingRule(n_max=20))
        assert result.diverged
        assert result.divergence_step == result.n_iter

    def test_xsy_random_coefficients_drawn_per_run(self, optimizer):
        obj = make_objective("xsy_random", 2)
        result = optimizer.run(obj, SolverConfig(), 10, 3, StoppingRule(n_max=5))
        assert np.isfinite(result.f_value)

    @pytest.mark.slow
    def test_ackley_memoryless_table_row(self, optimizer):
        obj = make_objective("ackley", 20, domain=(-3.0, 3.0))
        config = SolverConfig(m=0.0, gamma=1.0, lam=1.0, sigma=9.0, dt=0.01, alpha=5e4)
        result = optimizer.run(obj, config, 100, 0)
        assert np.max(np.abs(result.consensus)) < 0.25


class TestPopulationVariance:

    def test_coincident(self):
        assert population_variance(np.ones((4, 3))) == 0.0

    def test_two_points(self):
        assert population_variance(np.array([[-1.0], [1.0]])) == pytest.approx(1.0)
