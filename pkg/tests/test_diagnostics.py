import math

import numpy as np
import pytest

from src.application.acceptance import LYAPUNOV_CONFIG
from src.application.diagnostics import (laplace_sweep, loglog_slope, lyapunov, lyapunov_decay, lyapunov_trace,
                                         mu_condition, zero_inertia_rate)
from src.domain.diagnostics import DecayFit, RateRow
from src.domain.entities import SolverConfig, SolverMode, Swarm
from src.domain.errors import ConfigError, ConsensusError
from src.domain.objectives import make_objective


def _swarm(X, V=None):
    X = np.asarray(X, dtype=float)
    V = np.zeros_like(X) if V is None else np.asarray(V, dtype=float)
    return Swarm(X=X, V=V, fX=np.zeros(X.shape[0]))


class TestLyapunov:

    def test_resting_coincident_swarm(self):
        assert lyapunov(_swarm(np.ones((4, 2))), m=0.1, gamma=0.9).H == 0.0

    def test_single_particle_is_kinetic(self):
        sample = lyapunov(_swarm([[3.0, -1.0]], V=[[1.0, 2.0]]), m=0.1, gamma=0.9)
        assert sample.H == pytest.approx(5.0)
        assert sample.variance == 0.0

    def test_two_particles_hand_value(self):
        sample = lyapunov(_swarm([[-1.0], [1.0]]), m=0.5, gamma=1.0)
        assert sample.H == pytest.approx(1.0)

    def test_needs_inertia(self):
        with pytest.raises(ConfigError):
            lyapunov(_swarm([[0.0]]), m=0.0, gamma=1.0)

    @pytest.mark.parametrize("m, gamma", [(0.05, 0.95), (0.5, 0.5), (2.0, 0.1)])
    def test_quadratic_form_bounds(self, rng, m, gamma):
        sample = lyapunov(_swarm(rng.normal(size=(30, 3)), V=rng.normal(size=(30, 3))), m=m, gamma=gamma)
        k = gamma / (2.0 * m)
        q = k * k * sample.variance + sample.kinetic
        assert 0.5 * q - 1e-12 <= sample.H <= 1.5 * q + 1e-12


class TestMuCondition:

    def test_population_at_minimizer(self):
        obj = make_objective("ackley", 2, domain=(-3.0, 3.0))
        config = SolverConfig(m=0.5, gamma=0.5, lam=0.1, sigma=0.0, alpha=30.0)
        mu = mu_condition(_swarm(np.zeros((6, 2))), obj, config)
        expected = 0.1 * 0.5 / (2 * 0.25) - (2 * 0.01 / (0.5 * 0.5)) * 4.0
        assert mu == pytest.approx(expected)

    def test_huge_noise_is_negative(self, rng):
        obj = make_objective("ackley", 2, domain=(-3.0, 3.0))
        config = SolverConfig(m=0.5, sigma=100.0)
        assert mu_condition(_swarm(rng.uniform(-3, 3, (10, 2))), obj, config) < 0.0

    def test_value_offset_invariance(self, rng):
        obj = make_objective("ackley", 2, domain=(-3.0, 3.0))
        lifted = obj.model_copy(update={"value_offset": -5.0})
        config = SolverConfig(m=0.2, lam=1.0, sigma=0.3, alpha=2.0)
        swarm = _swarm(rng.uniform(-3, 3, (10, 2)))
        assert mu_condition(swarm, lifted, config) == pytest.approx(mu_condition(swarm, obj, config), rel=1e-12)

    def test_past_best_far_below_population(self):
        obj = make_objective("ackley", 2, domain=(-3.0, 3.0))
        config = SolverConfig(m=0.05, lam=1.0, sigma=3.5, alpha=5e4)
        assert mu_condition(_swarm([[1.0, 1.0], [2.0, 2.0]]), obj, config, best_seen=0.0) == -math.inf

    def test_moderate_gap_matches_direct_formula(self):
        obj = make_objective("ackley", 1, domain=(-3.0, 3.0))
        config = SolverConfig(m=0.5, gamma=0.5, lam=0.1, sigma=0.2, alpha=2.0)
        X = np.array([[0.5], [1.0], [-1.5]])
        values = np.asarray(obj.eval(X))
        ratio = 1.0 / np.mean(np.exp(-2.0 * (values - 0.25)))
        expected = 0.1 * 0.5 / 0.5 - (2 * 0.01 / 0.25 + 0.04 / 0.25) * 4.0 * ratio
        assert mu_condition(_swarm(X), obj, config, best_seen=0.25) == pytest.approx(expected, rel=1e-12)

    def test_no_noise_terms(self):
        obj = make_objective("ackley", 1, domain=(-3.0, 3.0))
        config = SolverConfig(m=0.5, gamma=0.5, lam=0.0, sigma=0.0, alpha=5e4)
        assert mu_condition(_swarm([[2.0]]), obj, config, best_seen=-100.0) == 0.0

    def test_infinite_alpha_rejected(self):
        obj = make_objective("ackley", 1, domain=(-3.0, 3.0))
        with pytest.raises(ConfigError):
            mu_condition(_swarm([[0.0]]), obj, SolverConfig(m=0.5, alpha=math.inf))


class TestLyapunovTrace:

    def test_one_sample_per_state(self):
        obj = make_objective("ackley", 3, domain=(-3.0, 3.0))
        config = SolverConfig(m=0.05, lam=0.5, sigma=0.1, alpha=0.1)
        samples = lyapunov_trace(obj, config, 20, 0, n_steps=30)
        assert len(samples) == 31
        assert all(s.mu is not None for s in samples)
        assert samples[-1].t == pytest.approx(0.3)

    def test_sharp_weights_with_running_best(self):
        obj = make_objective("ackley", 20, domain=(-3.0, 3.0))
        config = SolverConfig(m=0.05, lam=1.0, sigma=3.5, alpha=5e4)
        samples = lyapunov_trace(obj, config, 50, 0, n_steps=20)
        assert len(samples) == 21
        assert all(s.mu is not None and not math.isnan(s.mu) for s in samples)

    def test_memory_mode_rejected(self):
        obj = make_objective("ackley", 2, domain=(-3.0, 3.0))
        with pytest.raises(ConfigError):
            lyapunov_trace(obj, SolverConfig(mode=SolverMode.SDPSO_MEM, m=0.1), 10, 0, n_steps=5)

    def test_decay_fit_shape(self):
        obj = make_objective("ackley", 2, domain=(-3.0, 3.0))
        config = SolverConfig(m=0.05, lam=0.5, sigma=0.1, alpha=0.1)
        fit = lyapunov_decay(obj, config, n_particles=20, seed=1, n_replicates=3, n_steps=50)
        assert isinstance(fit, DecayFit)
        assert fit.ci_low <= fit.slope <= fit.ci_high
        assert fit.n_replicates == 3

    def test_decay_needs_replicates(self):
        obj = make_objective("ackley", 2, domain=(-3.0, 3.0))
        with pytest.raises(ConfigError):
            lyapunov_decay(obj, SolverConfig(m=0.1), 10, 0, n_replicates=1)

    @pytest.mark.slow
    def test_energy_decays_on_ackley(self):
        obj = make_objective("ackley", 20, domain=(-3.0, 3.0))
        fit = lyapunov_decay(obj, LYAPUNOV_CONFIG, n_particles=100, seed=11, n_replicates=50, n_steps=500)
        assert fit.mu_initial > 0.0
        assert fit.decays


class TestZeroInertiaRate:

    def test_gap_vanishes_at_zero_inertia(self, ackley_1d):
        rows = zero_inertia_rate(ackley_1d, SolverConfig(), [0.2, 0.025, 0.0], seed=4, t_final=0.5, n_particles=200)
        assert [r.m for r in rows] == [0.2, 0.025, 0.0]
        assert rows[-1].gap == 0.0
        assert rows[-1].w1 == 0.0
        assert rows[0].gap > rows[1].gap > 0.0

    def test_negative_inertia_rejected(self, ackley_1d):
        with pytest.raises(ConfigError):
            zero_inertia_rate(ackley_1d, SolverConfig(), [-0.1], seed=0, t_final=0.1)

    def test_loglog_slope_exact_power(self):
        rows = [RateRow(m=m, gap=3.0 * m ** 1.5, w1=0.0) for m in (0.2, 0.1, 0.05)]
        assert loglog_slope(rows) == pytest.approx(1.5)

    def test_loglog_slope_skips_zero_rows(self):
        rows = [RateRow(m=0.2, gap=0.4, w1=0.0), RateRow(m=0.1, gap=0.2, w1=0.0), RateRow(m=0.0, gap=0.0, w1=0.0)]
        assert loglog_slope(rows) == pytest.approx(1.0)

    def test_loglog_slope_needs_two_rows(self):
        with pytest.raises(ConfigError):
            loglog_slope([RateRow(m=0.1, gap=0.1, w1=0.0)])

    @pytest.mark.slow
    def test_rate_is_at_least_linear(self, ackley_1d):
        rows = zero_inertia_rate(ackley_1d, SolverConfig(), [0.2, 0.1, 0.05, 0.025], seed=3, t_final=1.0)
        assert loglog_slope(rows) >= 0.8


class TestLaplaceSweep:

    def test_gap_shrinks(self):
        rows = laplace_sweep([0.0, 1.0], [1.0, 10.0, 100.0, 1000.0])
        gaps = [r.gap for r in rows]
        assert all(b <= a for a, b in zip(gaps, gaps[1:]))
        for r in rows:
            assert 0.0 <= r.gap <= math.log(2) / r.alpha + 1e-15

    def test_alpha_list_must_increase(self):
        with pytest.raises(ConfigError):
            laplace_sweep([0.0, 1.0], [10.0, 1.0])

    def test_non_positive_alpha(self):
        with pytest.raises(ConfigError):
            laplace_sweep([0.0, 1.0], [0.0, 1.0])

    def test_gap_increase_is_reported(self, monkeypatch):
        import src.application.diagnostics as diagnostics
        values = iter([0.1, 0.2])
        monkeypatch.setattr(diagnostics, "laplace_value", lambda v, a: next(values))
        with pytest.raises(ConsensusError):
            laplace_sweep([0.0, 1.0], [1.0, 2.0])
