import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onionqrc.linalg import LinalgError
from onionqrc.readout import RidgeModel, r2_score, ridge_fit


class TestRidge:
    def test_identity_system(self):
        m = ridge_fit(np.eye(4), np.eye(4), 1e-6)
        assert np.linalg.norm(m.weights - np.eye(4)) < 1e-5

    def test_square_system_oracle(self, rng):
        X = rng.standard_normal((3, 3)) + 2 * np.eye(3)
        Y = rng.standard_normal(3)
        alpha = 1e-6
        w = np.linalg.inv(X.T @ X + alpha * np.eye(3)) @ X.T @ Y
        m = ridge_fit(X, Y, alpha)
        np.testing.assert_allclose(m.weights[0], w, rtol=1e-10)
        assert np.abs(m.predict(X)[:, 0] - Y).max() < 1e-4

    def test_duplicated_rows(self, rng):
        X = rng.standard_normal((20, 5))
        Y = rng.standard_normal((20, 2))
        a = ridge_fit(X, Y, 1e-3)
        b = ridge_fit(np.vstack([X, X]), np.vstack([Y, Y]), 2e-3)
        np.testing.assert_allclose(a.weights, b.weights, rtol=1e-10)

    def test_normal_equation_residual(self, rng):
        X = rng.standard_normal((50, 8))
        Y = rng.standard_normal((50, 3))
        m = ridge_fit(X, Y, 1e-6)
        lhs = (X.T @ X + 1e-6 * np.eye(8)) @ m.weights.T
        rhs = X.T @ Y
        assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) < 1e-9

    def test_multi_target_shape(self, rng):
        m = ridge_fit(rng.standard_normal((10, 4)), rng.standard_normal((10, 3)))
        assert m.weights.shape == (3, 4)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.floats(1e-6, 10), st.floats(1.01, 100))
    def test_weight_norm_monotone_in_alpha(self, seed, alpha, factor):
        rng = np.random.default_rng(seed)
        X, y = rng.standard_normal((15, 6)), rng.standard_normal(15)
        small = np.sum(ridge_fit(X, y, alpha).weights ** 2)
        large = np.sum(ridge_fit(X, y, alpha * factor).weights ** 2)
        assert large <= small * (1 + 1e-9)

    def test_errors(self):
        with pytest.raises(LinalgError, match="do not align"):
            ridge_fit(np.ones((3, 2)), np.ones(4))
        with pytest.raises(ValueError, match="alpha"):
            ridge_fit(np.ones((3, 2)), np.ones(3), 0.0)

    def test_predict_single_vector(self):
        m = RidgeModel(np.array([0.5, 2.0]))
        assert m.predict([2.0, 1.0]) == 3.0
        with pytest.raises(ValueError, match="expected 2 features"):
            m.predict([1.0])

    def test_dict_roundtrip(self, rng):
        m = ridge_fit(rng.standard_normal((6, 3)), rng.standard_normal(6))
        back = RidgeModel.from_dict(m.to_dict())
        np.testing.assert_array_equal(back.weights, m.weights)
        assert back.alpha == m.alpha


class TestR2:
    def test_perfect(self):
        assert r2_score([1, 2, 3], [1, 2, 3]) == 1.0

    def test_mean_prediction(self):
        assert r2_score([1, 2, 3], [2, 2, 2]) == 0.0

    def test_hand_value(self):
        # SS_res = 1, SS_tot = 2
        assert r2_score([1, 2, 3], [1, 2, 4]) == 0.5

    def test_matches_sklearn(self, rng):
        sklearn = pytest.importorskip("sklearn.metrics")
        y, p = rng.standard_normal(30), rng.standard_normal(30)
        assert r2_score(y, p) == pytest.approx(sklearn.r2_score(y, p), abs=1e-12)

    def test_constant_truth(self):
        assert r2_score([2, 2], [2, 2]) == 0.0
        assert r2_score([2, 2], [2, 3]) == -math.inf

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=20), st.integers(0, 1000))
    def test_upper_bound(self, y, seed):
        y = np.array(y)
        p = y + np.random.default_rng(seed).standard_normal(y.size)
        assert r2_score(y, p) <= 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            r2_score([1, 2], [1])
