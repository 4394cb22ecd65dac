import numpy as np
import pytest

from njode.losses import (
    LossConfig,
    batch_loss,
    batch_loss_and_grads,
    evaluation_metric,
    event_terms,
    event_terms_and_grads,
    sample_loss,
)
from njode.model import NjOdeModel
from njode.rngs import keyed_rng

from test_model import make_batch, tiny_cfg


class TestEventTerms:
    def test_hand_example_left_error(self):
        # X = 0, post = 1, left = -1: a = 1, b = 1, term = 4
        t = event_terms(
            np.array([[0.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[-1.0]])
        )
        assert t[0] == pytest.approx(4.0)

    def test_hand_example_jump_size(self):
        # same values, jump = 2: (1 + 2)^2 = 9
        t = event_terms(
            np.array([[0.0]]),
            np.array([[1.0]]),
            np.array([[1.0]]),
            np.array([[-1.0]]),
            kind="jump_size",
        )
        assert t[0] == pytest.approx(9.0)

    def test_masked_coordinates_ignored(self):
        x = np.array([[0.0, 123.0]])
        m = np.array([[1.0, 0.0]])
        post = np.array([[1.0, -55.0]])
        left = np.array([[-1.0, 7.0]])
        assert event_terms(x, m, post, left)[0] == pytest.approx(4.0)
        assert event_terms(x, m, post, left, kind="jump_size")[0] == pytest.approx(9.0)

    def test_kinds_agree_when_jump_lands_on_observation(self):
        rng = keyed_rng(0)
        x = rng.normal(size=(5, 3))
        m = (rng.random((5, 3)) < 0.7).astype(float)
        left = rng.normal(size=(5, 3))
        a = event_terms(x, m, x, left, kind="left_error")
        b = event_terms(x, m, x, left, kind="jump_size")
        assert np.allclose(a, b, atol=1e-14)

    def test_zero_terms_give_zero_gradients(self):
        x = np.array([[0.5, -0.5]])
        m = np.ones((1, 2))
        terms, gp, gl = event_terms_and_grads(x, m, x, x)
        assert terms[0] == 0.0
        assert np.all(gp == 0.0) and np.all(gl == 0.0)
        assert np.all(np.isfinite(gp)) and np.all(np.isfinite(gl))

    def test_gradients_match_finite_differences(self):
        rng = keyed_rng(1)
        x = rng.normal(size=(4, 2))
        m = np.array([[1, 1], [1, 0], [0, 1], [1, 1]], dtype=float)
        post = rng.normal(size=(4, 2))
        left = rng.normal(size=(4, 2))
        h = 1e-7
        for kind in ["left_error", "jump_size"]:
            _, gp, gl = event_terms_and_grads(x, m, post, left, kind)
            for arr, g in [(post, gp), (left, gl)]:
                fd = np.zeros_like(arr)
                for i in range(arr.shape[0]):
                    for j in range(arr.shape[1]):
                        arr[i, j] += h
                        up = event_terms(x, m, post, left, kind)[i]
                        arr[i, j] -= 2 * h
                        dn = event_terms(x, m, post, left, kind)[i]
                        arr[i, j] += h
                        fd[i, j] = (up - dn) / (2 * h)
                assert np.allclose(g, fd, atol=1e-6)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            event_terms(np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1)), kind="x")
        with pytest.raises(ValueError):
            LossConfig(kind="x")


class TestSampleLoss:
    def test_mean_over_events(self):
        # two events with terms 4 and 9
        x = [np.array([0.0]), np.array([0.0])]
        m = [np.array([1.0]), np.array([1.0])]
        post = [np.array([1.0]), np.array([1.0])]
        left = [np.array([-1.0]), np.array([-2.0])]
        # left_error: (1+1)^2 = 4 and (1+2)^2 = 9
        assert sample_loss(x, m, post, left) == pytest.approx(6.5)

    def test_empty_sample(self):
        assert sample_loss([], [], [], []) == 0.0


class TestBatchLoss:
    def test_matches_manual_average(self):
        cfg = tiny_cfg(step=0.05)
        model = NjOdeModel.build(cfg, seed=3)
        grid = np.arange(5) * 0.05
        samples = [
            {0: ([0.5], [1]), 2: ([0.9], [1]), 4: ([0.1], [1])},
            {0: ([-0.2], [1]), 3: ([0.4], [1])},
        ]
        values, masks = make_batch(grid, samples, dim=1)
        loss, _, fwd = batch_loss_and_grads(model, grid, values, masks)
        per_sample = np.zeros(2)
        for ev in fwd.events:
            terms = event_terms(ev.x, ev.mask, ev.y_post, ev.y_left)
            for r, t in zip(ev.rows, terms):
                per_sample[r] += t
        per_sample /= np.array([2.0, 1.0])
        assert loss == pytest.approx(per_sample.mean(), abs=1e-12)
        assert batch_loss(fwd) == pytest.approx(loss, abs=1e-12)

    def test_unobserved_values_do_not_affect_loss_or_grads(self):
        cfg = tiny_cfg(dim=2, step=0.05, initial_regime="subset", init_obs_coords=(0,))
        model = NjOdeModel.build(cfg, seed=3)
        grid = np.arange(5) * 0.05
        base = [
            {
                0: ([0.5, 0.0], [1, 0]),
                2: ([0.9, 0.3], [1, 1]),
                4: ([0.1, 0.0], [0, 1]),
            }
        ]
        noisy = [
            {
                0: ([0.5, 77.0], [1, 0]),
                2: ([0.9, 0.3], [1, 1]),
                4: ([-44.0, 0.0], [0, 1]),
            }
        ]
        va, ma = make_batch(grid, base, dim=2)
        vb, mb = make_batch(grid, noisy, dim=2)
        la, ga, _ = batch_loss_and_grads(model, grid, va, ma)
        lb, gb, _ = batch_loss_and_grads(model, grid, vb, mb)
        assert la == pytest.approx(lb, abs=1e-15)
        for x, y in zip(ga, gb):
            assert np.array_equal(x, y)

    @pytest.mark.parametrize("kind", ["left_error", "jump_size"])
    def test_parameter_gradients_match_finite_differences(self, kind):
        cfg = tiny_cfg(latent_dim=3, drift_hidden=(5,), jump_hidden=(4,), step=0.05)
        model = NjOdeModel.build(cfg, seed=8)
        grid = np.arange(5) * 0.05
        samples = [
            {0: ([0.5], [1]), 2: ([0.9], [1]), 4: ([0.1], [1])},
            {0: ([-0.2], [1]), 3: ([0.4], [1])},
        ]
        values, masks = make_batch(grid, samples, dim=1)
        _, grads, _ = batch_loss_and_grads(model, grid, values, masks, kind=kind)
        h = 1e-6
        for (name, arr), g in zip(model.blocks(), grads):
            flat = arr.ravel()
            gflat = g.ravel()
            fd = np.zeros_like(gflat)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                up, _, _ = batch_loss_and_grads(model, grid, values, masks, kind=kind)
                flat[i] = orig - h
                dn, _, _ = batch_loss_and_grads(model, grid, values, masks, kind=kind)
                flat[i] = orig
                fd[i] = (up - dn) / (2 * h)
            scale = max(np.max(np.abs(fd)), 1e-8)
            assert np.max(np.abs(gflat - fd)) / scale < 1e-5, name


class TestEvaluationMetric:
    def test_zero_for_identical_grids(self):
        a = keyed_rng(2).normal(size=(3, 7, 2))
        assert evaluation_metric(a, a) == 0.0

    def test_constant_offset(self):
        a = np.zeros((4, 5, 3))
        b = np.full((4, 5, 3), 0.2)
        # every element is off by 0.2, so the mean squared error is 0.04
        assert evaluation_metric(a, b) == pytest.approx(0.04)

    def test_single_point_difference(self):
        a = np.zeros((1, 10, 1))
        b = a.copy()
        b[0, 4, 0] = 0.5
        assert evaluation_metric(a, b) == pytest.approx(0.25 / 10)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            evaluation_metric(np.zeros((1, 2, 1)), np.zeros((1, 3, 1)))
