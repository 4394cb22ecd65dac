"""Tests for the truncated signature transform."""

import numpy as np
import pytest
from quadrature_oracle import quadrature_signature

from njode.obs_path import interpolate
from njode.signature import (
    TruncatedSignature,
    chen_concat,
    extend_batch,
    identity_signature,
    path_signature,
    sig_dim,
    signature_of_segment,
)
from test_obs_path import simple_path


class TestSigDim:
    def test_one_dim(self):
        assert sig_dim(1, 3) == 4

    def test_two_dim(self):
        assert sig_dim(2, 2) == 7

    def test_level_zero(self):
        assert sig_dim(3, 0) == 1

    def test_overflow_guard(self):
        with pytest.raises(OverflowError) as err:
            sig_dim(10, 12)
        assert "level" in str(err.value)

    def test_bad_args(self):
        with pytest.raises(ValueError):
            sig_dim(0, 2)
        with pytest.raises(ValueError):
            sig_dim(2, -1)


class TestSegment:
    def test_unit_increment_1d(self):
        s = signature_of_segment(np.array([1.0]), 3)
        assert np.allclose(s.coeffs, [1.0, 1.0, 0.5, 1.0 / 6.0])

    def test_level2_tensor_square(self):
        a, b = 0.7, -1.3
        s = signature_of_segment(np.array([a, b]), 2)
        lvl2 = s.coeffs[3:]
        assert np.allclose(lvl2, [a * a / 2, a * b / 2, a * b / 2, b * b / 2])

    def test_zero_increment(self):
        s = signature_of_segment(np.zeros(3), 2)
        expect = np.zeros(sig_dim(3, 2))
        expect[0] = 1.0
        assert np.array_equal(s.coeffs, expect)


class TestChen:
    def test_identity_neutral(self):
        rng = np.random.default_rng(0)
        s = signature_of_segment(rng.normal(size=2), 3)
        e = identity_signature(2, 3)
        assert np.allclose(chen_concat(s, e).coeffs, s.coeffs)
        assert np.allclose(chen_concat(e, s).coeffs, s.coeffs)

    def test_one_dim_depends_on_total_increment(self):
        a = signature_of_segment(np.array([0.3]), 4)
        b = signature_of_segment(np.array([0.7]), 4)
        whole = signature_of_segment(np.array([1.0]), 4)
        assert np.allclose(chen_concat(a, b).coeffs, whole.coeffs, atol=1e-14)

    def test_mismatch_rejected(self):
        with pytest.raises(ValueError):
            chen_concat(identity_signature(2, 2), identity_signature(3, 2))
        with pytest.raises(ValueError):
            chen_concat(identity_signature(2, 2), identity_signature(2, 3))

    def test_associativity(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a, b, c = (
                signature_of_segment(rng.normal(size=3), 3) for _ in range(3)
            )
            left = chen_concat(a, chen_concat(b, c)).coeffs
            right = chen_concat(chen_concat(a, b), c).coeffs
            assert np.allclose(left, right, rtol=0, atol=1e-12)

    def test_two_segment_vs_quadrature(self):
        times = np.array([0.0, 0.5, 1.0])
        values = np.array([[0.0, 0.0], [0.8, -0.4], [0.3, 1.1]])
        s1 = signature_of_segment(values[1] - values[0], 3)
        s2 = signature_of_segment(values[2] - values[1], 3)
        got = chen_concat(s1, s2).coeffs
        want = quadrature_signature(times, values, 3)
        assert np.allclose(got, want, rtol=1e-8, atol=1e-10)

    def test_batched_extension_matches_scalar(self):
        rng = np.random.default_rng(2)
        sigs = np.stack(
            [signature_of_segment(rng.normal(size=2), 3).coeffs for _ in range(5)]
        )
        incs = rng.normal(size=(5, 2))
        out = extend_batch(sigs, incs, dim=2, level=3)
        for r in range(5):
            want = chen_concat(
                TruncatedSignature(2, 3, sigs[r]), signature_of_segment(incs[r], 3)
            )
            assert np.allclose(out[r], want.coeffs, atol=1e-13)


class TestPathSignature:
    def test_constant_path_identity(self):
        p = simple_path([0.0, 0.5], [2.0, 2.0])
        s = path_signature(interpolate(p, 0.5), 3, time_augment=False)
        assert np.allclose(s.coeffs, identity_signature(1, 3).coeffs)

    def test_single_segment(self):
        p = simple_path([0.0, 0.4], [1.0, 3.0])
        s = path_signature(interpolate(p, 0.4), 3, time_augment=False)
        want = signature_of_segment(np.array([2.0]), 3)
        assert np.allclose(s.coeffs, want.coeffs)

    def test_time_augmented_dimension(self):
        p = simple_path([0.0, 0.4], [1.0, 3.0])
        s = path_signature(interpolate(p, 0.4), 2, time_augment=True)
        assert s.dim == 2
        assert len(s.coeffs) == sig_dim(2, 2)
        # first level-1 entry is the elapsed time of the skeleton
        assert s.coeffs[1] == pytest.approx(0.4)
        assert s.coeffs[2] == pytest.approx(2.0)

    def test_basepoint_invariance(self):
        rng = np.random.default_rng(3)
        vals = rng.normal(size=4)
        p1 = simple_path([0.0, 0.2, 0.6, 0.9], vals)
        p2 = simple_path([0.0, 0.2, 0.6, 0.9], vals + 5.0)
        s1 = path_signature(interpolate(p1, 0.9), 3, time_augment=True)
        s2 = path_signature(interpolate(p2, 0.9), 3, time_augment=True)
        assert np.allclose(s1.coeffs, s2.coeffs)

    def test_reversal_cancels(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            values = rng.normal(size=(4, 2))
            times = np.array([0.0, 0.3, 0.7, 1.0])
            fwd = identity_signature(2, 4)
            for k in range(3):
                fwd = chen_concat(
                    fwd, signature_of_segment(values[k + 1] - values[k], 4)
                )
            bwd = identity_signature(2, 4)
            for k in reversed(range(3)):
                bwd = chen_concat(
                    bwd, signature_of_segment(values[k] - values[k + 1], 4)
                )
            prod = chen_concat(fwd, bwd).coeffs
            assert np.allclose(prod, identity_signature(2, 4).coeffs, atol=1e-10)

    def test_scaling_by_level(self):
        rng = np.random.default_rng(5)
        vals = rng.normal(size=(4, 2))
        times = np.array([0.0, 0.2, 0.5, 1.0])
        lam = 1.7

        def sig_of(v):
            s = identity_signature(2, 3)
            for k in range(3):
                s = chen_concat(s, signature_of_segment(v[k + 1] - v[k], 3))
            return s

        base = sig_of(vals)
        scaled = sig_of(lam * vals)
        for level in range(4):
            lo = sig_dim(2, level - 1) if level else 0
            hi = sig_dim(2, level)
            assert np.allclose(
                scaled.coeffs[lo:hi], lam**level * base.coeffs[lo:hi], rtol=1e-12
            )

    def test_shuffle_spot_check(self):
        rng = np.random.default_rng(6)
        vals = rng.normal(size=(5, 3))
        s = identity_signature(3, 2)
        for k in range(4):
            s = chen_concat(s, signature_of_segment(vals[k + 1] - vals[k], 2))
        lvl1 = s.coeffs[1:4]
        lvl2 = s.coeffs[4:].reshape(3, 3)
        for i in range(3):
            for j in range(3):
                assert lvl2[i, j] + lvl2[j, i] == pytest.approx(
                    lvl1[i] * lvl1[j], rel=1e-10
                )

    def test_quadrature_agreement_random_paths(self):
        rng = np.random.default_rng(7)
        for _ in range(6):
            d = int(rng.integers(1, 4))
            m = int(rng.integers(1, 5))
            nseg = int(rng.integers(1, 6))
            times = np.concatenate([[0.0], np.sort(rng.random(nseg))])
            values = rng.normal(size=(nseg + 1, d))
            s = identity_signature(d, m)
            for k in range(nseg):
                s = chen_concat(s, signature_of_segment(values[k + 1] - values[k], m))
            want = quadrature_signature(times, values, m)
            err = np.abs(s.coeffs - want) / np.maximum(np.abs(want), 1.0)
            assert err.max() < 1e-8

    def test_signature_frozen_against_interpolation(self):
        # the skeleton only has knots at observation events, so the fold
        # over segments equals one extension per event
        rng = np.random.default_rng(8)
        p = simple_path([0.0, 0.25, 0.5, 0.75], rng.normal(size=4))
        full = path_signature(interpolate(p, 0.75), 3, time_augment=True)
        run = identity_signature(2, 3)
        prev_t = 0.0
        prev_v = p.obs_values[0, 0]
        for k in range(1, 4):
            inc = np.array(
                [p.obs_times[k] - prev_t, p.obs_values[k, 0] - prev_v]
            )
            run = chen_concat(run, signature_of_segment(inc, 3))
            prev_t, prev_v = p.obs_times[k], p.obs_values[k, 0]
        assert np.allclose(full.coeffs, run.coeffs, atol=1e-12)
