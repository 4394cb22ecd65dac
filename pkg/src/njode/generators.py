"""Synthetic path generators paired with exact prediction oracles.

Each generator samples grid paths of one stochastic (or deterministic)
process, draws observation schedules and masks, and packages everything as
a PathDataset.  For every process the exact conditional expectation given
the observations so far is available in closed form, either directly or
through the Gaussian conditioning module; `oracle_trajectory` evaluates it
on the grid, post-observation at observation times, with the pre-jump left
limits alongside.  This is the reference every trained model is scored
against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gauss import (
    corr_bm_cond_exp,
    fbm_cond_exp,
    fbm_kernel,
    filtering_cond_exp,
    lagged_bm_cond_exp,
)
from .obs_path import TIME_TOL, ObservedPath, PathDataset
from .rngs import keyed_rng

PROCESS_DEFAULTS = {
    "black_scholes": {"mu": 2.0, "sigma": 0.3, "x0": 1.0},
    "ou": {"k": 2.0, "m": 1.0, "sigma": 0.3, "x0": 0.0},
    "heston": {
        "mu": 2.0,
        "sigma": 0.3,
        "k": 2.0,
        "m": 4.0,
        "rho": 0.5,
        "x0": 1.0,
        "v0": 0.5,
        "feller_check": True,
        "include_variance": False,
    },
    "poisson": {"rate": 2.0},
    "fbm": {"hurst": 0.05},
    "corr_bm": {"alpha": math.sqrt(0.9)},
    "filtering": {"alpha": 1.0, "signal_obs_prob": 0.25},
    "lagged_bm": {"lag": 0.19, "aux_obs_prob": 0.5},
    "bm_square": {},
    "pendulum": {
        "m1": 1.0,
        "m2": 1.0,
        "l1": 1.0,
        "l2": 1.0,
        "g": 9.81,
        "angle_mean": math.pi,
        "angle_std": 0.2,
    },
}

# how many substeps each grid interval gets in the pendulum integrator
PENDULUM_SUBSTEPS = 10

_MAX_SCHEDULE_REDRAWS = 1000


def _validated_params(process: str, params: dict) -> dict:
    if process not in PROCESS_DEFAULTS:
        raise ValueError(f"unknown process {process!r}")
    out = dict(PROCESS_DEFAULTS[process])
    for key, val in params.items():
        if key not in out:
            raise ValueError(f"unknown parameter {key!r} for process {process!r}")
        out[key] = val
    if process == "black_scholes":
        if out["sigma"] <= 0:
            raise ValueError("sigma must be positive")
    elif process == "ou":
        if out["k"] <= 0 or out["sigma"] <= 0:
            raise ValueError("k and sigma must be positive")
    elif process == "heston":
        if min(out["sigma"], out["k"], out["m"]) <= 0:
            raise ValueError("sigma, k, m must be positive")
        if not -1.0 < out["rho"] < 1.0:
            raise ValueError("rho must lie in (-1, 1)")
        if out["feller_check"] and 2 * out["k"] * out["m"] < out["sigma"] ** 2:
            raise ValueError("Feller condition 2km >= sigma^2 violated")
    elif process == "poisson":
        if out["rate"] <= 0:
            raise ValueError("rate must be positive")
    elif process == "fbm":
        if not 0.0 < out["hurst"] <= 1.0:
            raise ValueError("Hurst parameter must lie in (0, 1]")
    elif process == "corr_bm":
        if not 0.0 <= out["alpha"] <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
    elif process == "filtering":
        if not 0.0 < out["signal_obs_prob"] < 1.0:
            raise ValueError("signal observation probability must lie in (0, 1)")
    elif process == "lagged_bm":
        if out["lag"] <= 0:
            raise ValueError("lag must be positive")
        if not 0.0 <= out["aux_obs_prob"] <= 1.0:
            raise ValueError("auxiliary observation probability must lie in [0, 1]")
    elif process == "pendulum":
        if min(out["m1"], out["m2"], out["l1"], out["l2"]) <= 0:
            raise ValueError("masses and lengths must be positive")
    return out


@dataclass
class GeneratorSpec:
    """What to sample: process, horizon/grid, observation schedule."""

    process: str
    params: dict = field(default_factory=dict)
    horizon: float = 1.0
    step: float = 0.01
    obs_prob: float = 0.1
    mask_intensity: float | None = None  # None = full masks; inf = one coordinate
    intensity_mode: str = "constant"  # or "state"
    split: str = "train"  # filtering / lagged schedules differ on "test"

    def __post_init__(self):
        self.params = _validated_params(self.process, self.params)
        if self.horizon <= 0 or self.step <= 0:
            raise ValueError("horizon and step must be positive")
        n = self.horizon / self.step
        if abs(n - round(n)) > 1e-9:
            raise ValueError("horizon must be an integer multiple of the grid step")
        if not 0.0 < self.obs_prob <= 1.0:
            raise ValueError("observation probability must lie in (0, 1]")
        if self.intensity_mode not in ("constant", "state"):
            raise ValueError(f"unknown intensity mode {self.intensity_mode!r}")
        if self.split not in ("train", "test"):
            raise ValueError(f"unknown split {self.split!r}")
        if self.mask_intensity is not None:
            if self.process in ("filtering", "lagged_bm"):
                raise ValueError(
                    f"{self.process} draws its own masks; mask_intensity must be None"
                )
            if not self.mask_intensity > 0:
                raise ValueError("mask intensity must be positive")
        if self.process == "lagged_bm":
            ratio = self.params["lag"] / self.step
            if abs(ratio - round(ratio)) > 1e-9:
                raise ValueError("lag must be an integer multiple of the grid step")

    @property
    def dim(self) -> int:
        if self.process == "heston":
            return 2 if self.params["include_variance"] else 1
        return {
            "black_scholes": 1,
            "ou": 1,
            "poisson": 1,
            "fbm": 1,
            "corr_bm": 2,
            "filtering": 2,
            "lagged_bm": 2,
            "bm_square": 2,
            "pendulum": 4,
        }[self.process]

    @property
    def n_grid(self) -> int:
        return int(round(self.horizon / self.step)) + 1

    def grid(self) -> np.ndarray:
        return np.arange(self.n_grid) * self.step

    def to_dict(self) -> dict:
        return {
            "process": self.process,
            "params": dict(self.params),
            "horizon": self.horizon,
            "step": self.step,
            "obs_prob": self.obs_prob,
            "mask_intensity": self.mask_intensity,
            "intensity_mode": self.intensity_mode,
            "split": self.split,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        return cls(**d)


# ---------------------------------------------------------------------------
# path simulation, one sample at a time


def _simulate_black_scholes(spec, rng, mu, sigma, x0):
    n = spec.n_grid
    dt = spec.step
    z = rng.standard_normal(n - 1)
    log_inc = (mu - 0.5 * sigma * sigma) * dt + sigma * math.sqrt(dt) * z
    x = np.empty(n)
    x[0] = x0
    x[1:] = x0 * np.exp(np.cumsum(log_inc))
    return x[:, None]


def _simulate_ou(spec, rng):
    p = spec.params
    n, dt = spec.n_grid, spec.step
    decay = math.exp(-p["k"] * dt)
    noise_sd = p["sigma"] * math.sqrt((1 - decay * decay) / (2 * p["k"]))
    x = np.empty(n)
    x[0] = p["x0"]
    z = rng.standard_normal(n - 1)
    for i in range(1, n):
        x[i] = p["m"] + (x[i - 1] - p["m"]) * decay + noise_sd * z[i - 1]
    return x[:, None]


def _simulate_heston(spec, rng):
    p = spec.params
    n, dt = spec.n_grid, spec.step
    sqdt = math.sqrt(dt)
    rho = p["rho"]
    rho_c = math.sqrt(1 - rho * rho)
    x = np.empty(n)
    v = np.empty(n)
    x[0], v[0] = p["x0"], p["v0"]
    for i in range(1, n):
        z1 = rng.standard_normal()
        z2 = rng.standard_normal()
        vp = max(v[i - 1], 0.0)
        x[i] = x[i - 1] * math.exp(
            (p["mu"] - 0.5 * vp) * dt + math.sqrt(vp) * sqdt * z1
        )
        v[i] = (
            v[i - 1]
            + p["k"] * (p["m"] - vp) * dt
            + p["sigma"] * math.sqrt(vp) * sqdt * (rho * z1 + rho_c * z2)
        )
    if p["include_variance"]:
        return np.stack([x, v], axis=1)
    return x[:, None]


def _simulate_poisson(spec, rng):
    rate = spec.params["rate"]
    arrivals = []
    total = 0.0
    while total < spec.horizon:
        total += rng.exponential(1.0 / rate)
        if total < spec.horizon:
            arrivals.append(total)
    counts = np.searchsorted(np.asarray(arrivals), spec.grid(), side="right")
    return counts.astype(np.float64)[:, None]


def _fbm_cholesky(spec):
    ts = spec.grid()[1:]
    gram = fbm_kernel(spec.params["hurst"], ts[:, None], ts[None, :])
    for jitter in (0.0, 1e-12, 1e-10):
        try:
            return np.linalg.cholesky(
                gram if jitter == 0.0 else gram + jitter * np.eye(len(ts))
            )
        except np.linalg.LinAlgError:
            continue
    raise np.linalg.LinAlgError("fractional BM grid covariance is not PD")


def _simulate_bm(spec, rng):
    inc = math.sqrt(spec.step) * rng.standard_normal(spec.n_grid - 1)
    return np.concatenate([[0.0], np.cumsum(inc)])


def _simulate_corr_bm(spec, rng):
    alpha = spec.params["alpha"]
    beta = math.sqrt(1 - alpha * alpha)
    a = _simulate_bm(spec, rng)
    b = _simulate_bm(spec, rng)
    c = _simulate_bm(spec, rng)
    return np.stack([alpha * a + beta * b, alpha * a + beta * c], axis=1)


def _simulate_filtering(spec, rng):
    alpha = spec.params["alpha"]
    x = _simulate_bm(spec, rng)
    w = _simulate_bm(spec, rng)
    return np.stack([alpha * x + w, x], axis=1)  # (sensor, signal)


def _simulate_lagged_bm(spec, rng):
    x = _simulate_bm(spec, rng)
    shift = int(round(spec.params["lag"] / spec.step))
    y = np.zeros_like(x)
    y[shift:] = x[: len(x) - shift]
    return np.stack([x, y], axis=1)


def _simulate_bm_square(spec, rng):
    x = _simulate_bm(spec, rng)
    return np.stack([x, x * x], axis=1)


def pendulum_derivative(state, p):
    """Time derivative of the double-pendulum state (angles and momenta)."""
    a1, a2, p1, p2 = state
    m1, m2, l1, l2, g = p["m1"], p["m2"], p["l1"], p["l2"], p["g"]
    delta = a1 - a2
    cos_d = math.cos(delta)
    sin_d = math.sin(delta)
    a0 = m1 + m2 * sin_d * sin_d
    da1 = (p1 * l2 - p2 * l1 * cos_d) / (l1 * l1 * l2 * a0)
    da2 = (p2 * (m1 + m2) * l1 - p1 * m2 * l2 * cos_d) / (m2 * l1 * l2 * l2 * a0)
    t1 = p1 * p2 * sin_d / (l1 * l2 * a0)
    t2 = (
        (
            p1 * p1 * m2 * l2 * l2
            - 2 * p1 * p2 * m2 * l1 * l2 * cos_d
            + p2 * p2 * (m1 + m2) * l1 * l1
        )
        * math.sin(2 * delta)
        / (2 * l1 * l1 * l2 * l2 * a0 * a0)
    )
    dp1 = -(m1 + m2) * g * l1 * math.sin(a1) - t1 + t2
    dp2 = -m2 * g * l2 * math.sin(a2) + t1 - t2
    return np.array([da1, da2, dp1, dp2])


def _rk4_step(state, dt, p):
    k1 = pendulum_derivative(state, p)
    k2 = pendulum_derivative(state + 0.5 * dt * k1, p)
    k3 = pendulum_derivative(state + 0.5 * dt * k2, p)
    k4 = pendulum_derivative(state + dt * k3, p)
    return state + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def pendulum_advance(state, duration, p, n_steps):
    state = np.asarray(state, dtype=np.float64)
    dt = duration / n_steps
    for _ in range(n_steps):
        state = _rk4_step(state, dt, p)
    return state


def _simulate_pendulum(spec, rng):
    p = spec.params
    angle = p["angle_mean"] + p["angle_std"] * rng.standard_normal()
    state = np.array([angle, angle, 0.0, 0.0])
    out = np.empty((spec.n_grid, 4))
    out[0] = state
    for i in range(1, spec.n_grid):
        state = pendulum_advance(state, spec.step, p, PENDULUM_SUBSTEPS)
        out[i] = state
    return out


_SIMULATORS = {
    "black_scholes": lambda spec, rng: _simulate_black_scholes(
        spec, rng, spec.params["mu"], spec.params["sigma"], spec.params["x0"]
    ),
    "ou": _simulate_ou,
    "heston": _simulate_heston,
    "poisson": _simulate_poisson,
    "corr_bm": _simulate_corr_bm,
    "filtering": _simulate_filtering,
    "lagged_bm": _simulate_lagged_bm,
    "bm_square": _simulate_bm_square,
    "pendulum": _simulate_pendulum,
}


# ---------------------------------------------------------------------------
# observation schedules


def _observation_flags(spec, values, rng):
    """Which grid points carry an observation event; index 0 always does."""
    n = spec.n_grid
    if spec.intensity_mode == "constant":
        probs = np.full(n, spec.obs_prob)
    else:
        sizes = np.linalg.norm(values, axis=1)
        probs = 0.05 + 0.4 * np.tanh(sizes / 10.0)
    flags = rng.random(n) < probs
    flags[0] = True
    return flags


def _draw_mask(spec, rng):
    d = spec.dim
    lam = spec.mask_intensity
    mask = np.zeros(d, dtype=np.uint8)
    if lam is None:
        mask[:] = 1
    elif np.isinf(lam):
        mask[rng.integers(d)] = 1
    else:
        count = min(d, 1 + rng.poisson(lam))
        mask[rng.choice(d, size=count, replace=False)] = 1
    return mask


def _standard_masks(spec, values, rng):
    flags = _observation_flags(spec, values, rng)
    masks = np.zeros((spec.n_grid, spec.dim), dtype=np.uint8)
    masks[0] = 1  # the start value is fully observed
    for k in np.nonzero(flags)[0]:
        if k == 0:
            continue
        masks[k] = _draw_mask(spec, rng)
    return masks


def _filtering_masks(spec, values, rng):
    # sensor coordinate observed at every event, signal coordinate with the
    # configured probability during training and never on the test split
    flags = _observation_flags(spec, values, rng)
    masks = np.zeros((spec.n_grid, 2), dtype=np.uint8)
    masks[0, 0] = 1
    px = spec.params["signal_obs_prob"]
    for k in np.nonzero(flags)[0]:
        if k == 0:
            continue
        masks[k, 0] = 1
        if spec.split == "train" and rng.random() < px:
            masks[k, 1] = 1
    return masks


def _lagged_masks(spec, values, rng):
    # the underlying coordinate is observed at every event time t_i; the
    # lagged coordinate at t_i + lag, plus (training only) at t_i + step
    # with the auxiliary probability
    flags = _observation_flags(spec, values, rng)
    n = spec.n_grid
    masks = np.zeros((n, 2), dtype=np.uint8)
    shift = int(round(spec.params["lag"] / spec.step))
    aux = spec.params["aux_obs_prob"]
    for k in np.nonzero(flags)[0]:
        masks[k, 0] = 1
        if k + shift < n:
            masks[k + shift, 1] = 1
        if spec.split == "train" and k + 1 < n and rng.random() < aux:
            masks[k + 1, 1] = 1
    masks[0, 0] = 1
    masks[0, 1] = 0
    return masks


def _sample_masks(spec, values, rng):
    if spec.process == "filtering":
        return _filtering_masks(spec, values, rng)
    if spec.process == "lagged_bm":
        return _lagged_masks(spec, values, rng)
    return _standard_masks(spec, values, rng)


def sample_dataset(spec: GeneratorSpec, n_samples: int, seed: int) -> PathDataset:
    """Draw n_samples paths with observation schedules as a PathDataset.

    Deterministic in (spec, seed): every sample has its own counter-based
    stream, so the result does not depend on generation order.  Schedules
    are redrawn until at least one observation event lands after t = 0.
    """
    if n_samples <= 0:
        raise ValueError("need a positive number of samples")
    grid = spec.grid()
    values = np.empty((n_samples, spec.n_grid, spec.dim))
    masks = np.empty((n_samples, spec.n_grid, spec.dim), dtype=np.uint8)
    chol = _fbm_cholesky(spec) if spec.process == "fbm" else None
    for i in range(n_samples):
        rng = keyed_rng(seed, "sample", i)
        if spec.process == "fbm":
            path = np.concatenate([[0.0], chol @ rng.standard_normal(spec.n_grid - 1)])
            values[i] = path[:, None]
        else:
            values[i] = _SIMULATORS[spec.process](spec, rng)
        for attempt in range(_MAX_SCHEDULE_REDRAWS):
            m = _sample_masks(spec, values[i], rng)
            if m[1:].any():
                break
        else:
            raise RuntimeError(
                f"no valid observation schedule for sample {i} after "
                f"{_MAX_SCHEDULE_REDRAWS} redraws"
            )
        masks[i] = m
    meta = {
        "generator": spec.to_dict(),
        "seed": seed,
        "n_samples": n_samples,
        "dim": spec.dim,
        "horizon": spec.horizon,
        "grid_step": spec.step,
    }
    return PathDataset(grid, values, masks, meta)


def sample_paths(spec: GeneratorSpec, n_samples: int, seed: int):
    """Convenience wrapper returning the samples as ObservedPath objects."""
    ds = sample_dataset(spec, n_samples, seed)
    return [ds.path(i) for i in range(ds.n_samples)]


def dataset_spec(ds: PathDataset) -> GeneratorSpec:
    """Rebuild the GeneratorSpec recorded in a dataset's meta block."""
    return GeneratorSpec.from_dict(ds.meta["generator"])


# ---------------------------------------------------------------------------
# oracle trajectories


@dataclass
class OracleTrajectory:
    """Conditional expectation on the grid, with pre-jump left limits.

    values holds the post-observation prediction at observation times; row j
    of left_values is the limit from the left at the j-th observation time
    (row 0 duplicates the post value at t = 0).
    """

    times: np.ndarray
    values: np.ndarray  # (n_times, d)
    left_values: np.ndarray  # (n_obs, d)


class _MarkovPredictor:
    """Closed-form families where the last observed state determines X-hat."""

    def __init__(self, spec):
        self.spec = spec
        self.state = None
        self.tau = 0.0

    def update(self, t, value, mask):
        # these datasets always reveal every coordinate at an event
        if not np.all(mask == 1):
            raise ValueError(
                f"{self.spec.process} oracle needs complete observations"
            )
        self.state = np.asarray(value, dtype=np.float64).copy()
        self.tau = t

    def predict(self, ts):
        p = self.spec.params
        gap = np.asarray(ts) - self.tau
        s = self.state
        if self.spec.process in ("black_scholes", "heston"):
            out = [s[0] * np.exp(p["mu"] * gap)]
            if self.spec.process == "heston" and p["include_variance"]:
                decay = np.exp(-p["k"] * gap)
                out.append(s[1] * decay + p["m"] * (1 - decay))
            return np.stack(out, axis=-1)
        if self.spec.process == "ou":
            decay = np.exp(-p["k"] * gap)
            return (s[0] * decay + p["m"] * (1 - decay))[:, None]
        if self.spec.process == "poisson":
            return (s[0] + p["rate"] * gap)[:, None]
        if self.spec.process == "bm_square":
            first = np.full_like(gap, s[0])
            return np.stack([first, s[0] * s[0] + gap], axis=-1)
        raise ValueError(f"no closed form for process {self.spec.process!r}")


class _PendulumPredictor(_MarkovPredictor):
    """Deterministic system: integrate forward from the last observed state."""

    def predict(self, ts):
        p = self.spec.params
        out = np.empty((len(ts), 4))
        state = self.state
        prev = self.tau
        for i, t in enumerate(np.asarray(ts)):
            gap = float(t) - prev
            if gap > TIME_TOL:
                n_grid_steps = gap / self.spec.step
                n = max(1, int(round(n_grid_steps * PENDULUM_SUBSTEPS)))
                state = pendulum_advance(state, gap, p, n)
                prev = float(t)
            out[i] = state
        return out


class _FbmPredictor:
    def __init__(self, spec):
        self.hurst = spec.params["hurst"]
        self.times = []
        self.vals = []

    def update(self, t, value, mask):
        if t <= TIME_TOL:
            return  # the pinned start value carries no information
        self.times.append(t)
        self.vals.append(float(value[0]))

    def predict(self, ts):
        return np.atleast_1d(
            fbm_cond_exp(self.hurst, self.times, self.vals, np.asarray(ts))
        )[:, None]


class _MixedBmPredictor:
    def __init__(self, spec):
        self.spec = spec
        self.times = []
        self.vals = []
        self.masks = []

    def update(self, t, value, mask):
        self.times.append(t)
        self.vals.append(np.asarray(value, dtype=np.float64))
        self.masks.append(np.asarray(mask))

    def predict(self, ts):
        alpha = self.spec.params["alpha"]
        fn = (
            corr_bm_cond_exp
            if self.spec.process == "corr_bm"
            else filtering_cond_exp
        )
        return np.atleast_2d(
            fn(alpha, self.times, self.vals, self.masks, np.asarray(ts))
        )


class _LaggedPredictor:
    def __init__(self, spec):
        self.lag = spec.params["lag"]
        self.times = []
        self.vals = []

    def update(self, t, value, mask):
        if mask[0]:
            self.times.append(t)
            self.vals.append(float(value[0]))
        if mask[1]:
            self.times.append(t - self.lag)
            self.vals.append(float(value[1]))

    def predict(self, ts):
        return np.atleast_2d(
            lagged_bm_cond_exp(self.lag, self.times, self.vals, np.asarray(ts))
        )


def _build_predictor(spec):
    if spec.process in ("black_scholes", "ou", "heston", "poisson", "bm_square"):
        return _MarkovPredictor(spec)
    if spec.process == "pendulum":
        return _PendulumPredictor(spec)
    if spec.process == "fbm":
        return _FbmPredictor(spec)
    if spec.process in ("corr_bm", "filtering"):
        return _MixedBmPredictor(spec)
    if spec.process == "lagged_bm":
        return _LaggedPredictor(spec)
    raise ValueError(f"unknown process {spec.process!r}")


def oracle_trajectory(
    spec: GeneratorSpec, path: ObservedPath, eval_times=None
) -> OracleTrajectory:
    """Exact conditional expectation along one sample's observations."""
    if eval_times is None:
        eval_times = path.grid_times
    eval_times = np.asarray(eval_times, dtype=np.float64)
    pos = np.searchsorted(eval_times, path.obs_times - TIME_TOL)
    if np.any(
        np.abs(eval_times[np.clip(pos, 0, len(eval_times) - 1)] - path.obs_times)
        > 1e-9
    ):
        raise ValueError("eval_times must include every observation time")
    n_obs = len(path.obs_times)
    pred = _build_predictor(spec)
    out = np.empty((len(eval_times), spec.dim))
    left = np.empty((n_obs, spec.dim))
    for j in range(n_obs):
        pred.update(path.obs_times[j], path.obs_values[j], path.masks[j])
        hi = pos[j + 1] if j + 1 < n_obs else len(eval_times)
        seg = np.arange(pos[j], hi)
        if seg.size:
            out[seg] = pred.predict(eval_times[seg])
        if j + 1 < n_obs:
            left[j + 1] = pred.predict(np.array([path.obs_times[j + 1]]))[0]
    left[0] = out[pos[0]]
    return OracleTrajectory(times=eval_times, values=out, left_values=left)


def oracle_grid(spec: GeneratorSpec, ds: PathDataset) -> np.ndarray:
    """Oracle trajectories for every sample of a dataset, (N, K, d)."""
    out = np.empty_like(ds.values)
    for i in range(ds.n_samples):
        out[i] = oracle_trajectory(spec, ds.path(i)).values
    return out


def variance_estimate(values):
    """Variance implied by a paired (mean, second-moment) trajectory.

    values: (..., 2 d) with the first d entries the mean prediction and the
    last d the second-moment prediction.  Negative values (rounding or model
    error) are clipped to zero.
    """
    values = np.asarray(values, dtype=np.float64)
    two_d = values.shape[-1]
    if two_d % 2:
        raise ValueError("need an even number of coordinates (mean, second moment)")
    d = two_d // 2
    m1 = values[..., :d]
    m2 = values[..., d:]
    return np.maximum(m2 - m1 * m1, 0.0)
