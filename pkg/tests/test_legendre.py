import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import minimize

from ctonline.errors import DomainError
from ctonline.legendre import (
    conjugate_G,
    entropy_F,
    fenchel_gap,
    ftrl_argmax,
    grad_G,
    hess_G,
)

# values from a 40-digit mpmath evaluation of the closed forms
F_HALF_QUARTERS_BETA2 = -0.5198603854199589820629
SOFTMAX_1_0 = (0.7310585786300048792512, 0.2689414213699951207488)

finite = st.floats(-50, 50, allow_nan=False)
betas = st.floats(1e-2, 1e2)


def dual(n_max=16):
    return st.integers(1, n_max).flatmap(lambda n: arrays(float, n, elements=finite))


def simplex_oracle_argmax(s, beta):
    """Maximize x.s - F(x) over the simplex with a generic constrained solver."""
    n = len(s)

    def neg(x):
        x = np.clip(x, 1e-300, None)
        return -(x @ s - x @ np.log(x) / beta)

    res = minimize(neg, np.full(n, 1.0 / n), method="SLSQP", bounds=[(0, 1)] * n,
                   constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1}],
                   options={"ftol": 1e-15, "maxiter": 500})
    return res.x


class TestEntropy:
    def test_uniform(self):
        assert entropy_F(np.full(4, 0.25), 1.0) == pytest.approx(-math.log(4), abs=1e-15)

    def test_vertex_is_zero(self):
        assert entropy_F([1.0, 0.0, 0.0], 3.7) == 0.0

    def test_mixed_point(self):
        assert entropy_F([0.5, 0.25, 0.25], 2.0) == pytest.approx(F_HALF_QUARTERS_BETA2, abs=1e-15)

    @pytest.mark.parametrize("x", [[0.5, 0.6], [-0.1, 1.1], [0.3, 0.3, 0.3], [np.nan, 1.0]])
    def test_rejects_non_simplex(self, x):
        with pytest.raises(DomainError):
            entropy_F(x, 1.0)

    def test_rejects_bad_beta(self):
        with pytest.raises(DomainError):
            entropy_F([0.5, 0.5], 0.0)

    def test_range(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = rng.integers(1, 10)
            beta = rng.uniform(0.1, 10)
            f = entropy_F(rng.dirichlet(np.ones(n)), beta)
            assert -math.log(n) / beta - 1e-12 <= f <= 0


class TestConjugate:
    def test_zero(self):
        assert conjugate_G(np.zeros(4), 1.0) == pytest.approx(math.log(4), abs=1e-15)

    @pytest.mark.parametrize("beta", [0.3, 1.0, 7.0])
    def test_translation(self, beta):
        c = 2.5
        assert conjugate_G(np.full(5, c), beta) == pytest.approx(c + math.log(5) / beta, rel=1e-14)

    def test_dominant_coordinate_no_overflow(self):
        assert conjugate_G([100.0, 0.0], 1.0) == 100.0

    def test_large_argument(self):
        # beta * |y| = 1e6 would overflow exp without max-subtraction
        assert conjugate_G([1e6, 0.0, -1e6], 1.0) == 1e6

    def test_rejects_non_finite(self):
        with pytest.raises(DomainError):
            conjugate_G([np.inf, 0.0], 1.0)


class TestGrad:
    def test_zero_is_uniform(self):
        np.testing.assert_allclose(grad_G(np.zeros(5), 2.0), np.full(5, 0.2), atol=0)

    def test_two_arms(self):
        np.testing.assert_allclose(grad_G([1.0, 0.0], 1.0), SOFTMAX_1_0, rtol=1e-15)

    @settings(max_examples=200)
    @given(dual(), betas, finite)
    def test_simplex_and_shift_invariance(self, y, beta, c):
        x = grad_G(y, beta)
        assert np.all(x >= 0)
        assert abs(x.sum() - 1) <= 1e-12
        np.testing.assert_allclose(grad_G(y + c, beta), x, atol=1e-10)

    def test_stacked_rows(self):
        y = np.random.default_rng(1).normal(size=(7, 4))
        stacked = grad_G(y, 1.3)
        for row, yy in zip(stacked, y):
            np.testing.assert_array_equal(row, grad_G(yy, 1.3))


class TestHessian:
    def test_two_arms_at_zero(self):
        np.testing.assert_allclose(hess_G(np.zeros(2), 1.0), [[0.25, -0.25], [-0.25, 0.25]], atol=1e-16)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        y, beta, step = rng.normal(size=6), 3.0, 1e-5
        fd = np.column_stack([
            (grad_G(y + step * e, beta) - grad_G(y - step * e, beta)) / (2 * step) for e in np.eye(6)
        ])
        H = hess_G(y, beta)
        assert np.abs(H - fd).max() / np.abs(H).max() <= 1e-5

    @settings(max_examples=200)
    @given(dual(), betas)
    def test_psd_rows_sum_to_zero_trace(self, y, beta):
        H = hess_G(y, beta)
        np.testing.assert_allclose(H, H.T, atol=0)
        scale = max(1.0, beta)
        assert np.linalg.eigvalsh(H).min() >= -1e-12 * scale
        assert np.abs(H.sum(axis=1)).max() <= 1e-12 * scale
        assert np.trace(H) <= beta * (1 + 1e-12)


class TestFenchelGap:
    def test_zero_at_gradient(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            y = rng.normal(size=rng.integers(1, 12))
            assert abs(fenchel_gap(grad_G(y, 1.5), y, 1.5)) <= 1e-10

    def test_vertex_against_zero(self):
        assert fenchel_gap([1.0, 0.0, 0.0], np.zeros(3), 1.0) == pytest.approx(math.log(3), abs=1e-15)

    def test_random_pairs_nonnegative(self):
        rng = np.random.default_rng(5)
        gaps = []
        for _ in range(10_000):
            n = int(rng.integers(1, 17))
            x = rng.dirichlet(np.ones(n))
            y = rng.normal(scale=3.0, size=n)
            gaps.append(fenchel_gap(x, y, float(10 ** rng.uniform(-2, 2))))
        assert min(gaps) >= -1e-10

    def test_positive_away_from_gradient(self):
        y = np.array([0.3, -1.0, 2.0])
        x = grad_G(y, 1.0)
        x2 = 0.9 * x + 0.1 * np.array([1.0, 0.0, 0.0])
        assert fenchel_gap(x2, y, 1.0) > 1e-8

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            fenchel_gap([0.5, 0.5], [0.0, 0.0, 0.0], 1.0)

    @settings(max_examples=200)
    @given(dual(), betas)
    def test_conjugacy_round_trip(self, y, beta):
        x = grad_G(y, beta)
        x = x / x.sum()
        value = entropy_F(x, beta) + conjugate_G(y, beta) - x @ y
        assert abs(value) <= 1e-10 * max(1.0, np.abs(y).max())


class TestFtrlArgmax:
    def test_zero_is_uniform(self):
        np.testing.assert_allclose(ftrl_argmax(np.zeros(3), 10.0), np.full(3, 1 / 3))

    def test_concentrates_for_large_beta(self):
        s = np.array([0.2, 0.3, 0.1, 0.0])
        assert ftrl_argmax(s, 1e3).max() > 1 - 1e-6

    def test_matches_numerical_maximization(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            s = rng.normal(size=4)
            beta = float(rng.uniform(0.5, 3))
            np.testing.assert_allclose(ftrl_argmax(s, beta), simplex_oracle_argmax(s, beta), atol=1e-6)
