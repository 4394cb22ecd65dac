"""Exact conditional expectations for jointly Gaussian observation vectors.

The shared core is plain multivariate-normal conditioning: split a joint
covariance into observed and target blocks, solve the observed Gram matrix
by Cholesky (with a jitter ladder for nearly singular cases), and read off
the conditional mean and covariance.  On top of that sit the process
oracles used by the experiments: fractional Brownian motion, a correlated
pair of Brownian motions, the linear filtering pair (noisy sensor of a
Brownian signal), and a Brownian motion observed together with its time
lagged copy.

All processes here start at zero, so an observation at time zero carries no
information and callers drop it before conditioning.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)
VARIANCE_TOL = -1e-10
_TOL = 1e-9


def _chol_solve(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    for jitter in JITTER_LADDER:
        mat = gram if jitter == 0.0 else gram + jitter * np.eye(gram.shape[0])
        try:
            factor = cho_factor(mat, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            continue
        return cho_solve(factor, rhs, check_finite=False)
    raise np.linalg.LinAlgError(
        "observed covariance block is singular beyond the jitter ladder"
    )


def condition(cov, obs_idx, target_idx, obs_values):
    """Conditional mean and covariance of a zero-mean Gaussian vector.

    cov is the joint covariance; obs_idx/target_idx are disjoint index
    arrays into it.  Returns (mean, covariance) of the target entries given
    the observed entries equal obs_values.  Tiny negative conditional
    variances (rounding noise) are clipped to zero; genuinely negative ones
    raise.
    """
    cov = np.asarray(cov, dtype=np.float64)
    oi = np.asarray(obs_idx, dtype=np.intp).ravel()
    ti = np.asarray(target_idx, dtype=np.intp).ravel()
    if np.intersect1d(oi, ti).size:
        raise ValueError("observed and target index sets overlap")
    obs_values = np.asarray(obs_values, dtype=np.float64).ravel()
    if obs_values.shape[0] != oi.shape[0]:
        raise ValueError("observed values do not match the observed index set")
    s22 = cov[np.ix_(ti, ti)]
    if oi.size == 0:
        mean = np.zeros(ti.shape[0])
        var = s22.copy()
    else:
        s11 = cov[np.ix_(oi, oi)]
        s21 = cov[np.ix_(ti, oi)]
        sol = _chol_solve(s11, np.concatenate([obs_values[:, None], s21.T], axis=1))
        mean = s21 @ sol[:, 0]
        var = s22 - s21 @ sol[:, 1:]
        var = 0.5 * (var + var.T)
    d = np.diagonal(var).copy()
    if np.any(d < VARIANCE_TOL):
        raise np.linalg.LinAlgError(
            f"conditional variance {d.min():.3e} below tolerance; covariance not PSD"
        )
    np.fill_diagonal(var, np.maximum(d, 0.0))
    return mean, var


def fbm_kernel(hurst: float, s, t):
    """Covariance of fractional Brownian motion, elementwise in s and t."""
    s = np.asarray(s, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    two_h = 2.0 * hurst
    return 0.5 * (np.abs(s) ** two_h + np.abs(t) ** two_h - np.abs(t - s) ** two_h)


def _check_fbm_args(hurst, obs_times, t):
    if not 0.0 < hurst <= 1.0:
        raise ValueError("Hurst parameter must lie in (0, 1]")
    obs_times = np.asarray(obs_times, dtype=np.float64)
    if obs_times.size and np.any(np.diff(np.sort(obs_times)) < _TOL):
        raise np.linalg.LinAlgError("duplicate observation times make the Gram matrix singular")
    if obs_times.size and np.any(obs_times <= _TOL):
        raise ValueError("observation times must be strictly positive")
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if obs_times.size and np.any(tt < obs_times.max() - _TOL):
        raise ValueError("evaluation times must not precede the last observation")
    return obs_times, tt


def fbm_cond_exp(hurst, obs_times, obs_values, t):
    """Conditional mean of fractional BM at t given earlier observations.

    t may be a scalar or an array; every entry must be at or after the last
    observation time.  With no observations the mean is zero.
    """
    obs_times, tt = _check_fbm_args(hurst, obs_times, t)
    scalar = np.ndim(t) == 0
    if obs_times.size == 0:
        out = np.zeros(tt.shape[0])
        return float(out[0]) if scalar else out
    obs_values = np.asarray(obs_values, dtype=np.float64).ravel()
    n = obs_times.shape[0]
    pts = np.concatenate([obs_times, tt])
    cov = fbm_kernel(hurst, pts[:, None], pts[None, :])
    mean, _ = condition(cov, np.arange(n), np.arange(n, n + tt.shape[0]), obs_values)
    return float(mean[0]) if scalar else mean


def fbm_cond_var(hurst, obs_times, t):
    """Conditional variance of fractional BM at t (clipped at zero)."""
    obs_times, tt = _check_fbm_args(hurst, obs_times, t)
    n = obs_times.shape[0]
    pts = np.concatenate([obs_times, tt])
    cov = fbm_kernel(hurst, pts[:, None], pts[None, :])
    _, var = condition(
        cov, np.arange(n), np.arange(n, n + tt.shape[0]), np.zeros(n)
    )
    out = np.diagonal(var)
    return float(out[0]) if np.ndim(t) == 0 else out.copy()


def _flatten_masked_obs(obs_times, obs_values, masks):
    """(time, coordinate, value) triples from masked observation vectors.

    Observations at time zero are dropped: the processes here start at a
    known value, so they carry no information.  Duplicate (time, coordinate)
    pairs raise.
    """
    obs_times = np.asarray(obs_times, dtype=np.float64)
    obs_values = np.atleast_2d(np.asarray(obs_values, dtype=np.float64))
    masks = np.atleast_2d(np.asarray(masks))
    times, coords, vals = [], [], []
    for i in range(obs_times.shape[0]):
        if obs_times[i] <= _TOL:
            continue
        for j in range(obs_values.shape[1]):
            if masks[i, j]:
                times.append(obs_times[i])
                coords.append(j)
                vals.append(obs_values[i, j])
    seen = set()
    for tm, cd in zip(times, coords):
        key = (round(tm / _TOL), cd)
        if key in seen:
            raise np.linalg.LinAlgError(
                "duplicate (time, coordinate) observation makes the Gram matrix singular"
            )
        seen.add(key)
    return (
        np.asarray(times, dtype=np.float64),
        np.asarray(coords, dtype=np.intp),
        np.asarray(vals, dtype=np.float64),
    )


def _mixed_bm_cond_exp(mixing, obs_times, obs_values, masks, t):
    """Conditional mean for coordinates of mixed independent BMs.

    mixing is the (d, d) matrix M with Cov(X^i_s, X^j_t) = min(s, t) M_ij.
    Targets are all d coordinates at each evaluation time.
    """
    d = mixing.shape[0]
    times, coords, vals = _flatten_masked_obs(obs_times, obs_values, masks)
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if times.size and np.any(tt < times.max() - _TOL):
        raise ValueError("evaluation times must not precede the last observation")
    n = times.shape[0]
    e = tt.shape[0]
    all_times = np.concatenate([times, np.repeat(tt, d)])
    all_coords = np.concatenate([coords, np.tile(np.arange(d), e)])
    cov = np.minimum(all_times[:, None], all_times[None, :]) * mixing[
        np.ix_(all_coords, all_coords)
    ]
    mean, _ = condition(cov, np.arange(n), np.arange(n, n + e * d), vals)
    out = mean.reshape(e, d)
    return out[0] if scalar else out


def corr_bm_cond_exp(alpha, obs_times, obs_values, masks, t):
    """Conditional mean of a correlated pair of Brownian motions.

    The pair is (alpha A + beta B, alpha A + beta C) for independent
    standard BMs A, B, C with beta = sqrt(1 - alpha^2), so each coordinate
    is standard and the cross covariance at a joint time is alpha^2 t.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    a2 = alpha * alpha
    mixing = np.array([[1.0, a2], [a2, 1.0]])
    return _mixed_bm_cond_exp(mixing, obs_times, obs_values, masks, t)


def filtering_cond_exp(alpha, obs_times, obs_values, masks, t):
    """Conditional mean for the sensor/signal pair (Y, X).

    Coordinate 0 is the sensor Y = alpha X + W, coordinate 1 the signal X;
    X and W are independent standard BMs.
    """
    mixing = np.array([[alpha * alpha + 1.0, alpha], [alpha, 1.0]])
    return _mixed_bm_cond_exp(mixing, obs_times, obs_values, masks, t)


def lagged_bm_cond_exp(lag, x_times, x_values, t):
    """Conditional mean of (X_t, Y_t) with Y the lag-delayed copy of X.

    x_times/x_values are every revealed point of the underlying BM: its own
    observations plus lagged-copy observations shifted back by the lag.
    Between revealed points the conditional mean is the bridge (linear)
    interpolation; beyond the last point it is constant; before time zero
    the process is pinned at zero, which covers t <= lag for the lagged
    coordinate.
    """
    if not lag > 0.0:
        raise ValueError("lag must be positive")
    x_times = np.asarray(x_times, dtype=np.float64).ravel()
    x_values = np.asarray(x_values, dtype=np.float64).ravel()
    order = np.argsort(x_times)
    x_times, x_values = x_times[order], x_values[order]
    rt, rv = [0.0], [0.0]
    for tm, vx in zip(x_times, x_values):
        if tm <= _TOL:
            if abs(vx) > _TOL:
                raise ValueError("revealed value at time zero must be zero")
            continue
        if abs(tm - rt[-1]) < _TOL:
            if abs(vx - rv[-1]) > 1e-7:
                raise ValueError(
                    f"conflicting revealed values {rv[-1]!r} and {vx!r} at time {tm!r}"
                )
            continue
        rt.append(float(tm))
        rv.append(float(vx))
    xs = np.interp(t, rt, rv)
    ys = np.interp(np.asarray(t, dtype=np.float64) - lag, rt, rv)
    return np.stack([xs, ys], axis=-1)
