import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.domain.consensus import (ConsensusParams, argmin_point, global_best, hard_switch, laplace_value,
                                  local_global_best, log_weights, smooth_switch)
from src.domain.errors import ConsensusError


class TestGlobalBest:

    def test_single_point(self):
        np.testing.assert_array_equal(global_best([[1.5, -2.0]], [3.0], 30.0), [1.5, -2.0])

    def test_alpha_zero_is_mean(self):
        np.testing.assert_allclose(global_best([[0.0], [2.0]], [5.0, -1.0], 0.0), [1.0])

    def test_two_point_weighted_mean(self):
        q = global_best([[0.0], [1.0]], [0.0, 10.0], 5.0)
        expected = math.exp(-50.0) / (1.0 + math.exp(-50.0))
        np.testing.assert_allclose(q, [expected], rtol=1e-10)

    def test_flat_points_return_scalar(self):
        q = global_best(np.array([0.0, 2.0]), [1.0, 1.0], 10.0)
        assert float(q) == pytest.approx(1.0)

    def test_alpha_inf_is_argmin(self):
        x = np.array([[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
        np.testing.assert_array_equal(global_best(x, [3.0, 1.0, 2.0], math.inf), [2.0, 3.0])

    def test_huge_alpha_does_not_overflow(self):
        q = global_best([[0.0], [1.0]], [1e6, 0.0], 1e8)
        np.testing.assert_array_equal(q, [1.0])

    def test_measure_weights(self):
        q = global_best([[0.0], [1.0], [2.0]], [0.0, 0.0, 0.0], 1.0, weights=np.array([1.0, 0.0, 1.0]))
        np.testing.assert_allclose(q, [1.0])

    def test_monotone_in_alpha_toward_argmin(self):
        x = np.array([[0.0], [1.0]])
        f = np.array([0.3, 0.0])
        qs = [float(global_best(x, f, a)[0]) for a in (0.1, 1.0, 10.0, 100.0)]
        assert all(b >= a for a, b in zip(qs, qs[1:]))

    @pytest.mark.parametrize("points, values", [
        (np.empty((0, 2)), np.empty(0)),
        (np.zeros((2, 2)), np.array([0.0, np.nan])),
        (np.zeros((3, 2)), np.zeros(2)),
    ])
    def test_invalid_population(self, points, values):
        with pytest.raises(ConsensusError):
            global_best(points, values, 1.0)

    def test_negative_alpha(self):
        with pytest.raises(ConsensusError):
            global_best([[0.0]], [0.0], -1.0)

    def test_log_weights_max_is_zero(self):
        lw = log_weights(np.array([3.0, 1.0, 2.0]), 4.0)
        assert lw.max() == 0.0


class TestLocalGlobalBest:

    def test_equal_local_bests(self):
        p = np.tile([0.5, -1.0], (4, 1))
        np.testing.assert_allclose(local_global_best(p, [1.0, 2.0, 3.0, 4.0], 10.0), [0.5, -1.0])

    def test_large_alpha_matches_argmin(self, rng):
        p = rng.normal(size=(30, 3))
        f = rng.permutation(30).astype(float)
        np.testing.assert_allclose(local_global_best(p, f, 1e6), argmin_point(p, f), atol=1e-9)

    def test_symmetric_values_midpoint(self):
        np.testing.assert_allclose(local_global_best([[-1.0], [3.0]], [2.0, 2.0], 7.0), [1.0])

    def test_argmin_tie_lowest_index(self):
        np.testing.assert_array_equal(argmin_point([[1.0], [2.0]], [0.0, 0.0]), [1.0])


class TestSwitches:

    def test_smooth_equal(self):
        assert smooth_switch(1.0, 1.0, 5.0) == 1.0

    def test_smooth_saturates(self):
        assert smooth_switch(0.0, 1.0, 1e6) == pytest.approx(2.0, abs=1e-9)

    def test_smooth_value(self):
        assert smooth_switch(0.0, 0.5, 1.0) == pytest.approx(1.0 + math.tanh(0.5), abs=1e-12)
        assert smooth_switch(0.0, 0.5, 1.0) == pytest.approx(1.462117, abs=1e-6)

    def test_smooth_inf_beta_is_hard(self):
        assert smooth_switch(0.0, 1.0, math.inf) == 2.0

    @pytest.mark.parametrize("fx, fy, expected", [(0.0, 1.0, 2.0), (1.0, 1.0, 1.0), (1.0, 0.0, 0.0)])
    def test_hard(self, fx, fy, expected):
        assert hard_switch(fx, fy) == expected

    def test_vectorized(self):
        out = smooth_switch(np.array([0.0, 1.0]), np.array([1.0, 0.0]), 2.0)
        np.testing.assert_allclose(out, [1.0 + math.tanh(2.0), 1.0 - math.tanh(2.0)])


class TestLaplaceValue:

    def test_single_value(self):
        assert laplace_value([3.25], 17.0) == pytest.approx(3.25)

    def test_two_values(self):
        assert laplace_value([0.0, 1.0], 10.0) == pytest.approx(-0.1 * math.log((1 + math.exp(-10)) / 2), rel=1e-12)
        assert laplace_value([0.0, 1.0], 10.0) == pytest.approx(0.0693, abs=1e-4)

    def test_large_alpha_bound(self):
        alpha = 1e4
        assert 0.0 <= laplace_value([0.0, 1.0], alpha) <= math.log(2) / alpha + 1e-15

    @pytest.mark.parametrize("alpha", [0.0, -2.0])
    def test_non_positive_alpha(self, alpha):
        with pytest.raises(ConsensusError):
            laplace_value([0.0, 1.0], alpha)


class TestConsensusProperties:
    CASES = 10_000

    def test_shift_invariance(self):
        # dyadic values keep f + c and f - min(f) exact
        rng = np.random.default_rng(11)
        for _ in range(self.CASES):
            n, d = rng.integers(1, 8), rng.integers(1, 4)
            x = rng.normal(size=(n, d))
            f = rng.integers(-512, 512, n) / 32.0
            alpha = float(10 ** rng.uniform(-2, 3))
            c = float(rng.integers(-4096, 4096)) / 32.0
            np.testing.assert_allclose(global_best(x, f + c, alpha), global_best(x, f, alpha), atol=1e-12, rtol=0)

    def test_convex_hull(self):
        rng = np.random.default_rng(12)
        for _ in range(self.CASES):
            n, d = rng.integers(1, 8), rng.integers(1, 4)
            x = rng.normal(size=(n, d))
            q = global_best(x, rng.normal(size=n), float(10 ** rng.uniform(-2, 4)))
            assert np.all(q >= x.min(axis=0) - 1e-12) and np.all(q <= x.max(axis=0) + 1e-12)

    def test_two_point_monotone(self):
        rng = np.random.default_rng(13)
        for _ in range(self.CASES):
            x = rng.normal(size=(2, 1))
            f = rng.normal(size=2)
            if f[0] == f[1]:
                continue
            target = x[int(np.argmin(f)), 0]
            a1, a2 = np.sort(10 ** rng.uniform(-2, 3, 2))
            d1 = abs(global_best(x, f, a1)[0] - target)
            d2 = abs(global_best(x, f, a2)[0] - target)
            assert d2 <= d1 + 1e-12

    def test_laplace_bounds(self):
        rng = np.random.default_rng(14)
        for _ in range(self.CASES):
            n = int(rng.integers(1, 10))
            f = rng.normal(size=n)
            alpha = float(10 ** rng.uniform(-1, 4))
            value = laplace_value(f, alpha)
            assert f.min() - 1e-12 <= value <= f.min() + math.log(n) / alpha + 1e-12

    def test_switch_symmetry(self):
        rng = np.random.default_rng(15)
        fx, fy = rng.normal(size=(2, self.CASES))
        for beta in (0.01, 1.0, 30.0, 3e3):
            s = smooth_switch(fx, fy, beta)
            np.testing.assert_allclose(s + smooth_switch(fy, fx, beta), 2.0, atol=1e-15)
            assert np.all((s >= 0.0) & (s <= 2.0))


class TestConsensusParams:

    def test_defaults(self):
        p = ConsensusParams()
        assert p.alpha == 30.0 and p.beta == 30.0

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            ConsensusParams(alpha=-1.0)
