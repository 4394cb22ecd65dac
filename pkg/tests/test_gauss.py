import numpy as np
import pytest

from njode.gauss import (
    condition,
    corr_bm_cond_exp,
    fbm_cond_exp,
    fbm_cond_var,
    fbm_kernel,
    filtering_cond_exp,
    lagged_bm_cond_exp,
)


class TestCondition:
    def test_correlated_pair_hand_case(self):
        # Var(U) = Var(V) = t, Cov = 0.9 t: E[V | U = u] = 0.9 u
        t1 = 0.4
        cov = np.array([[t1, 0.9 * t1], [0.9 * t1, t1]])
        mean, var = condition(cov, [0], [1], [1.3])
        assert abs(mean[0] - 0.9 * 1.3) < 1e-12
        assert abs(var[0, 0] - t1 * (1 - 0.81)) < 1e-12

    def test_filtering_hand_case(self):
        # Y = X + W: Var(Y) = 2t, Cov(X, Y) = t: E[X | Y = y] = y / 2
        t1 = 0.3
        cov = np.array([[2 * t1, t1], [t1, t1]])
        mean, _ = condition(cov, [0], [1], [0.8])
        assert abs(mean[0] - 0.4) < 1e-12

    def test_independent_blocks_return_prior(self):
        cov = np.diag([1.0, 2.0, 3.0])
        mean, var = condition(cov, [0, 1], [2], [5.0, -7.0])
        assert mean[0] == 0.0
        assert var[0, 0] == 3.0

    def test_no_observations_return_prior(self):
        cov = np.array([[1.5]])
        mean, var = condition(cov, [], [0], [])
        assert mean[0] == 0.0 and var[0, 0] == 1.5

    def test_overlapping_index_sets_rejected(self):
        cov = np.eye(2)
        with pytest.raises(ValueError, match="overlap"):
            condition(cov, [0], [0, 1], [1.0])

    def test_perfect_correlation_clips_variance_to_zero(self):
        cov = np.array([[1.0, 1.0], [1.0, 1.0]])
        mean, var = condition(cov, [0], [1], [0.7])
        assert abs(mean[0] - 0.7) < 1e-10
        assert var[0, 0] == 0.0

    def test_non_psd_matrix_raises(self):
        cov = np.array([[1.0, 1.1], [1.1, 1.0]])
        with pytest.raises(np.linalg.LinAlgError, match="variance"):
            condition(cov, [0], [1], [0.7])


class TestFbm:
    def test_kernel_diagonal(self):
        assert fbm_kernel(0.3, 0.7, 0.7) == pytest.approx(0.7 ** 0.6)

    def test_single_observation_formula(self):
        h, t1, x, t = 0.3, 0.25, 1.7, 0.6
        expected = fbm_kernel(h, t1, t) / t1 ** (2 * h) * x
        assert fbm_cond_exp(h, [t1], [x], t) == pytest.approx(expected, abs=1e-12)

    def test_half_hurst_is_martingale(self):
        obs_t, obs_v = [0.2, 0.6], [0.5, -0.3]
        for t in [0.6, 0.8, 1.0]:
            assert fbm_cond_exp(0.5, obs_t, obs_v, t) == pytest.approx(-0.3, abs=1e-9)

    def test_no_observations_gives_zero(self):
        assert fbm_cond_exp(0.05, [], [], 0.7) == 0.0

    def test_vectorized_matches_scalar(self):
        obs_t, obs_v = [0.1, 0.35, 0.5], [0.2, -0.4, 0.1]
        ts = np.array([0.5, 0.6, 0.9])
        vec = fbm_cond_exp(0.05, obs_t, obs_v, ts)
        for i, t in enumerate(ts):
            assert vec[i] == pytest.approx(fbm_cond_exp(0.05, obs_t, obs_v, t), abs=1e-12)

    def test_duplicate_times_raise(self):
        with pytest.raises(np.linalg.LinAlgError, match="duplicate"):
            fbm_cond_exp(0.2, [0.3, 0.3], [1.0, 1.0], 0.5)

    def test_eval_before_last_observation_rejected(self):
        with pytest.raises(ValueError, match="precede"):
            fbm_cond_exp(0.2, [0.3, 0.6], [1.0, 1.0], 0.4)

    def test_bad_hurst(self):
        with pytest.raises(ValueError):
            fbm_cond_exp(0.0, [0.3], [1.0], 0.5)
        with pytest.raises(ValueError):
            fbm_cond_exp(1.5, [0.3], [1.0], 0.5)

    def test_variance_zero_at_observation_time(self):
        v = fbm_cond_var(0.3, [0.2, 0.5], 0.5)
        assert 0.0 <= v < 1e-9

    def test_variance_grows_past_last_observation(self):
        v1 = fbm_cond_var(0.3, [0.2, 0.5], 0.6)
        v2 = fbm_cond_var(0.3, [0.2, 0.5], 0.9)
        assert 0.0 < v1 < v2


class TestCorrBm:
    def test_observed_coordinate_returned_exactly(self):
        out = corr_bm_cond_exp(
            np.sqrt(0.9), [0.4], [[1.3, 0.0]], [[1, 0]], 0.4
        )
        assert out[0] == pytest.approx(1.3, abs=1e-10)

    def test_single_time_cross_prediction(self):
        out = corr_bm_cond_exp(
            np.sqrt(0.9), [0.4], [[1.3, 0.0]], [[1, 0]], 0.4
        )
        assert out[1] == pytest.approx(0.9 * 1.3, abs=1e-12)

    def test_independent_coordinates_when_alpha_zero(self):
        out = corr_bm_cond_exp(0.0, [0.4], [[1.3, 0.0]], [[1, 0]], 0.7)
        assert out[1] == pytest.approx(0.0, abs=1e-12)

    def test_constant_between_observations(self):
        obs_t = [0.2, 0.5]
        obs_v = [[0.4, 0.0], [0.0, -0.6]]
        masks = [[1, 0], [0, 1]]
        a = corr_bm_cond_exp(0.8, obs_t, obs_v, masks, 0.7)
        b = corr_bm_cond_exp(0.8, obs_t, obs_v, masks, 0.95)
        assert np.allclose(a, b, atol=1e-12)

    def test_time_zero_observation_ignored(self):
        a = corr_bm_cond_exp(0.8, [0.0, 0.4], [[0.0, 0.0], [1.0, 0.0]], [[1, 1], [1, 0]], 0.6)
        b = corr_bm_cond_exp(0.8, [0.4], [[1.0, 0.0]], [[1, 0]], 0.6)
        assert np.allclose(a, b, atol=1e-12)

    def test_duplicate_entry_raises(self):
        with pytest.raises(np.linalg.LinAlgError, match="duplicate"):
            corr_bm_cond_exp(0.8, [0.4, 0.4], [[1.0, 0.0], [1.0, 0.0]], [[1, 0], [1, 0]], 0.6)

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            corr_bm_cond_exp(1.2, [0.4], [[1.0, 0.0]], [[1, 0]], 0.6)


class TestFiltering:
    def test_one_sensor_obs_alpha_one(self):
        out = filtering_cond_exp(1.0, [0.3], [[0.8, 0.0]], [[1, 0]], 0.3)
        assert out[0] == pytest.approx(0.8, abs=1e-10)
        assert out[1] == pytest.approx(0.4, abs=1e-12)

    def test_signal_observed_directly(self):
        out = filtering_cond_exp(0.7, [0.3], [[0.8, -0.5]], [[1, 1]], 0.5)
        assert out[1] == pytest.approx(-0.5, abs=1e-10)

    def test_general_alpha_single_obs(self):
        alpha = 0.7
        y = 1.1
        out = filtering_cond_exp(alpha, [0.25], [[y, 0.0]], [[1, 0]], 0.25)
        assert out[1] == pytest.approx(alpha * y / (alpha ** 2 + 1), abs=1e-12)


class TestLaggedBm:
    def test_before_any_information(self):
        out = lagged_bm_cond_exp(0.19, [], [], 0.095)
        assert np.allclose(out, [0.0, 0.0])

    def test_bridge_interpolation_example(self):
        out = lagged_bm_cond_exp(0.19, [0.2, 0.4], [1.0, 3.0], 0.49)
        assert out[1] == pytest.approx(2.0, abs=1e-12)
        assert out[0] == pytest.approx(3.0, abs=1e-12)

    def test_stale_lag_returns_last_observation(self):
        out = lagged_bm_cond_exp(0.19, [0.2, 0.4], [1.0, 3.0], 0.8)
        assert out[1] == pytest.approx(3.0, abs=1e-12)

    def test_ramp_from_origin(self):
        # only one revealed point: bridge from the pinned origin
        out = lagged_bm_cond_exp(0.1, [0.4], [2.0], 0.3)
        assert out[1] == pytest.approx(2.0 * 0.2 / 0.4, abs=1e-12)
        assert out[0] == pytest.approx(2.0 * 0.3 / 0.4, abs=1e-12)

    def test_vectorized_times(self):
        out = lagged_bm_cond_exp(0.19, [0.2, 0.4], [1.0, 3.0], np.array([0.49, 0.8]))
        assert out.shape == (2, 2)
        assert out[0, 1] == pytest.approx(2.0)
        assert out[1, 1] == pytest.approx(3.0)

    def test_duplicate_consistent_points_merged(self):
        out = lagged_bm_cond_exp(0.19, [0.2, 0.2, 0.4], [1.0, 1.0, 3.0], 0.49)
        assert out[1] == pytest.approx(2.0, abs=1e-12)

    def test_conflicting_duplicates_raise(self):
        with pytest.raises(ValueError, match="conflicting"):
            lagged_bm_cond_exp(0.19, [0.2, 0.2], [1.0, 2.0], 0.49)

    def test_lag_must_be_positive(self):
        with pytest.raises(ValueError, match="lag"):
            lagged_bm_cond_exp(0.0, [0.2], [1.0], 0.49)
