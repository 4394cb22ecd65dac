"""The latent jump-ODE model and its exact backward pass.

Between observation events a drift network moves the latent state through
explicit Euler steps; at each observation event a jump network resets it
using the freshly extended path features (truncated signature of the
interpolated observations, or the plain forward-fill vector for the
no-signature ablations); a readout maps latent to output space.  The
backward pass is the discrete adjoint of exactly this recursion, so
gradients are exact up to floating point.

Model variants reproduce the ablation grid: `njode` (no signature,
non-recurrent jump), `njode+sig`, `njode+rnn`, and `pd-njode` (signature and
recurrent jump, the default).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .neural import Mlp, collect_blocks
from .obs_path import TIME_TOL, ObservedPath
from .rngs import keyed_rng
from .signature import extend_batch, sig_dim

VARIANTS = {
    "njode": dict(use_signature=False, recurrent_jump=False),
    "njode+sig": dict(use_signature=True, recurrent_jump=False),
    "njode+rnn": dict(use_signature=False, recurrent_jump=True),
    "pd-njode": dict(use_signature=True, recurrent_jump=True),
}

INITIAL_REGIMES = ("full", "empty", "subset")


@dataclass
class ModelConfig:
    """Hyperparameters of the model and its four networks.

    The drift net consumes (H, tau(t), t - tau(t), features, X0); the jump
    net consumes (H left limit if recurrent, t, features, X0); the readout
    maps H to the d_X-dimensional prediction; the init net produces H at
    t = 0 when the start value is not fully observed (empty or fixed-subset
    initial mask).  `features` is the running truncated signature when
    use_signature is set, otherwise the forward-fill vector of last observed
    values.
    """

    dim: int
    latent_dim: int
    drift_hidden: tuple = (50,)
    jump_hidden: tuple = (50,)
    readout_hidden: tuple = ()
    init_hidden: tuple = ()
    activation: str = "tanh"
    dropout: float = 0.1
    sig_level: int = 2
    use_signature: bool = True
    recurrent_jump: bool = True
    time_augment: bool = True
    initial_regime: str = "full"
    init_obs_coords: tuple = ()
    step: float = 0.01

    def __post_init__(self):
        if self.initial_regime not in INITIAL_REGIMES:
            raise ValueError(f"unknown initial regime {self.initial_regime!r}")
        self.drift_hidden = tuple(self.drift_hidden)
        self.jump_hidden = tuple(self.jump_hidden)
        self.readout_hidden = tuple(self.readout_hidden)
        self.init_hidden = tuple(self.init_hidden)
        self.init_obs_coords = tuple(self.init_obs_coords)

    @property
    def sig_path_dim(self) -> int:
        return self.dim + (1 if self.time_augment else 0)

    @property
    def feature_width(self) -> int:
        if self.use_signature:
            return sig_dim(self.sig_path_dim, self.sig_level)
        return self.dim

    @property
    def drift_in_width(self) -> int:
        return self.latent_dim + 2 + self.feature_width + self.dim

    @property
    def jump_in_width(self) -> int:
        rec = self.latent_dim if self.recurrent_jump else 0
        return rec + 1 + self.feature_width + self.dim

    @property
    def init_in_width(self) -> int:
        return max(1, len(self.init_obs_coords))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "latent_dim": self.latent_dim,
            "drift_hidden": list(self.drift_hidden),
            "jump_hidden": list(self.jump_hidden),
            "readout_hidden": list(self.readout_hidden),
            "init_hidden": list(self.init_hidden),
            "activation": self.activation,
            "dropout": self.dropout,
            "sig_level": self.sig_level,
            "use_signature": self.use_signature,
            "recurrent_jump": self.recurrent_jump,
            "time_augment": self.time_augment,
            "initial_regime": self.initial_regime,
            "init_obs_coords": list(self.init_obs_coords),
            "step": self.step,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)

    def apply_variant(self, name: str) -> "ModelConfig":
        if name not in VARIANTS:
            raise ValueError(f"unknown model variant {name!r}")
        out = ModelConfig.from_dict(self.to_dict())
        for key, val in VARIANTS[name].items():
            setattr(out, key, val)
        return out


class NjOdeModel:
    """Parameter container: drift, jump, readout and optional init nets."""

    def __init__(self, cfg: ModelConfig, nets: dict):
        self.cfg = cfg
        self.nets = nets

    @classmethod
    def build(cls, cfg: ModelConfig, seed: int) -> "NjOdeModel":
        nets = {
            "drift": Mlp(
                cfg.drift_in_width,
                cfg.drift_hidden,
                cfg.latent_dim,
                activation=cfg.activation,
                dropout=cfg.dropout,
                init_rng=keyed_rng(seed, "init", "drift"),
            ),
            "jump": Mlp(
                cfg.jump_in_width,
                cfg.jump_hidden,
                cfg.latent_dim,
                activation=cfg.activation,
                dropout=cfg.dropout,
                init_rng=keyed_rng(seed, "init", "jump"),
            ),
            "readout": Mlp(
                cfg.latent_dim,
                cfg.readout_hidden,
                cfg.dim,
                activation=cfg.activation,
                dropout=cfg.dropout,
                init_rng=keyed_rng(seed, "init", "readout"),
            ),
        }
        if cfg.initial_regime != "full":
            nets["init"] = Mlp(
                cfg.init_in_width,
                cfg.init_hidden,
                cfg.latent_dim,
                activation=cfg.activation,
                dropout=cfg.dropout,
                init_rng=keyed_rng(seed, "init", "init"),
            )
        return cls(cfg, nets)

    def blocks(self):
        return collect_blocks(self.nets)


@dataclass
class ObsEvent:
    """One observation event shared by a subset of batch rows."""

    k: int  # index into the walk grid
    t: float
    rows: np.ndarray  # batch rows observing here
    y_left: np.ndarray  # readout of the left-limit latent, (rows, d)
    y_post: np.ndarray  # readout after the jump
    h_left: np.ndarray
    x: np.ndarray  # ground-truth values at the event
    mask: np.ndarray


@dataclass
class BatchForward:
    times: np.ndarray
    events: list
    n_post_obs: np.ndarray  # per-sample count of events after t = 0
    y_grid: np.ndarray | None
    h_grid: np.ndarray | None
    tape: list | None
    train: bool
    features_final: np.ndarray | None = None  # signature or forward fill at T


@dataclass
class LatentTrajectory:
    """Single-sample view: latent and output on the eval grid.

    Values at observation times are post-jump; the separate left-limit
    arrays hold the pre-jump state.  Row 0 of the left arrays duplicates the
    post state because the initial latent has no pre-jump counterpart; the
    loss never consumes it.
    """

    times: np.ndarray
    latent: np.ndarray  # (len(times), d_latent)
    output: np.ndarray  # (len(times), d)
    obs_indices: np.ndarray
    latent_left: np.ndarray  # (n_obs, d_latent)
    output_left: np.ndarray  # (n_obs, d)


def _check_regime(cfg: ModelConfig, mask0: np.ndarray):
    if cfg.initial_regime == "full":
        ok = np.all(mask0 == 1)
    elif cfg.initial_regime == "empty":
        ok = np.all(mask0 == 0)
    else:
        want = np.zeros(cfg.dim, dtype=mask0.dtype)
        want[list(cfg.init_obs_coords)] = 1
        ok = np.all(mask0 == want[None, :])
    if not ok:
        raise ValueError(
            f"initial masks do not match model regime {cfg.initial_regime!r}"
        )


def forward_batch(
    model: NjOdeModel,
    times: np.ndarray,
    values: np.ndarray,
    masks: np.ndarray,
    train: bool = False,
    rng=None,
    record_grid: bool = False,
    taped: bool = False,
) -> BatchForward:
    """Run the model over a batch of samples sharing one walk grid.

    times: (K,) strictly increasing, starting at 0; every observation time of
    every sample is a grid point.  values/masks: (B, K, d); a row of zeros in
    masks[:, k] means no observation of that sample at times[k].  Euler steps
    subdivide each grid interval so no step exceeds cfg.step.
    """
    cfg = model.cfg
    drift, jump, readout = model.nets["drift"], model.nets["jump"], model.nets["readout"]
    B, K, d = values.shape
    if d != cfg.dim:
        raise ValueError(f"data dimension {d} does not match model dim {cfg.dim}")
    dH = cfg.latent_dim
    mask0 = masks[:, 0, :]
    _check_regime(cfg, mask0)

    ff = values[:, 0, :] * mask0
    x0 = ff.copy()
    if cfg.use_signature:
        sig = np.zeros((B, cfg.feature_width))
        sig[:, 0] = 1.0
    else:
        sig = None

    def features(rows=None):
        src = sig if cfg.use_signature else ff
        return src if rows is None else src[rows]

    tau = np.zeros(B)
    tape = [] if taped else None
    events: list[ObsEvent] = []

    # initial latent state
    if cfg.initial_regime == "full":
        cols = []
        if cfg.recurrent_jump:
            cols.append(np.zeros((B, dH)))
        cols += [np.zeros((B, 1)), features(), x0]
        H, cache = jump.forward(np.concatenate(cols, axis=1), train=train, rng=rng)
        if taped:
            tape.append(("init", "jump", cache))
    else:
        net = model.nets["init"]
        if cfg.initial_regime == "empty":
            iin = np.zeros((B, 1))
        else:
            iin = values[:, 0, :][:, list(cfg.init_obs_coords)]
        H, cache = net.forward(iin, train=train, rng=rng)
        if taped:
            tape.append(("init", "init", cache))

    y_grid = h_grid = None
    if record_grid:
        y_grid = np.empty((B, K, d))
        h_grid = np.empty((B, K, dH))
        y_grid[:, 0], _ = readout.forward(H)
        h_grid[:, 0] = H

    any_obs = masks.any(axis=2)  # (B, K)
    for k in range(1, K):
        gap = float(times[k] - times[k - 1])
        nsub = max(1, int(np.ceil(gap / cfg.step - 1e-9)))
        dt = gap / nsub
        for s in range(nsub):
            t_cur = float(times[k - 1]) + s * dt
            inp = np.concatenate(
                [H, tau[:, None], (t_cur - tau)[:, None], features(), x0], axis=1
            )
            vec, cache = drift.forward(inp, train=train, rng=rng)
            if taped:
                tape.append(("euler", cache, dt))
            H = H + dt * vec
        if not np.all(np.isfinite(H)):
            bad = int(np.nonzero(~np.isfinite(H).all(axis=1))[0][0])
            raise FloatingPointError(
                f"latent state non-finite at t={times[k]:.6g}, sample {bad}"
            )
        rows = np.nonzero(any_obs[:, k])[0]
        if rows.size:
            h_left = H[rows].copy()
            y_left, cache_l = readout.forward(h_left, train=train, rng=rng)
            m_k = masks[rows, k, :].astype(np.float64)
            xv = values[rows, k, :]
            new_ff = np.where(m_k > 0, xv, ff[rows])
            if cfg.use_signature:
                inc_cols = [new_ff - ff[rows]]
                if cfg.time_augment:
                    inc_cols.insert(0, (times[k] - tau[rows])[:, None])
                inc = np.concatenate(
                    [c if c.ndim == 2 else c[:, None] for c in inc_cols], axis=1
                )
                sig[rows] = extend_batch(
                    sig[rows], inc, dim=cfg.sig_path_dim, level=cfg.sig_level
                )
            ff[rows] = new_ff
            tau[rows] = times[k]
            cols = []
            if cfg.recurrent_jump:
                cols.append(h_left)
            cols += [np.full((rows.size, 1), float(times[k])), features(rows), x0[rows]]
            h_post, cache_j = jump.forward(
                np.concatenate(cols, axis=1), train=train, rng=rng
            )
            y_post, cache_p = readout.forward(h_post, train=train, rng=rng)
            H = H.copy()
            H[rows] = h_post
            events.append(
                ObsEvent(
                    k=k,
                    t=float(times[k]),
                    rows=rows,
                    y_left=y_left,
                    y_post=y_post,
                    h_left=h_left,
                    x=xv,
                    mask=m_k,
                )
            )
            if taped:
                tape.append(("jump", len(events) - 1, cache_l, cache_j, cache_p))
        if record_grid:
            y_grid[:, k], _ = readout.forward(H)
            h_grid[:, k] = H

    n_post_obs = any_obs[:, 1:].sum(axis=1).astype(np.int64)
    return BatchForward(
        times=np.asarray(times),
        events=events,
        n_post_obs=n_post_obs,
        y_grid=y_grid,
        h_grid=h_grid,
        tape=tape,
        train=train,
        features_final=(sig if cfg.use_signature else ff).copy(),
    )


def backward_batch(model: NjOdeModel, fwd: BatchForward, d_y_post, d_y_left):
    """Discrete adjoint: gradients of the scalar whose per-event output
    gradients are given.

    d_y_post/d_y_left: lists aligned with fwd.events, each (len(rows), d).
    Returns flat gradient arrays aligned with model.blocks().
    """
    if fwd.tape is None:
        raise ValueError("forward pass was not taped")
    cfg = model.cfg
    dH = cfg.latent_dim
    drift, jump, readout = model.nets["drift"], model.nets["jump"], model.nets["readout"]

    acc = {
        name: [
            (np.zeros_like(layer.W), np.zeros_like(layer.b))
            for layer in net.layers
        ]
        for name, net in model.nets.items()
    }

    def add(name, grads):
        slot = acc[name]
        for i, (dW, db) in enumerate(grads):
            slot[i][0][...] += dW
            slot[i][1][...] += db

    B = fwd.n_post_obs.shape[0]
    lam = np.zeros((B, dH))
    for entry in reversed(fwd.tape):
        kind = entry[0]
        if kind == "euler":
            _, cache, dt = entry
            dx, grads = drift.backward(cache, lam * dt)
            add("drift", grads)
            lam = lam + dx[:, :dH]
        elif kind == "jump":
            _, ei, cache_l, cache_j, cache_p = entry
            ev = fwd.events[ei]
            rows = ev.rows
            dxp, gp = readout.backward(cache_p, d_y_post[ei])
            add("readout", gp)
            lam_rows = lam[rows] + dxp
            dxj, gj = jump.backward(cache_j, lam_rows)
            add("jump", gj)
            lam_new = dxj[:, :dH] if cfg.recurrent_jump else np.zeros((rows.size, dH))
            dxl, gl = readout.backward(cache_l, d_y_left[ei])
            lam = lam.copy()
            lam[rows] = lam_new + dxl
            add("readout", gl)
        else:  # init
            _, net_name, cache = entry
            _, grads = model.nets[net_name].backward(cache, lam)
            add(net_name, grads)

    flat = []
    for name in sorted(model.nets):
        for dW, db in acc[name]:
            flat.append(dW)
            flat.append(db)
    return flat


def forward_path(
    model: NjOdeModel,
    path: ObservedPath,
    eval_times=None,
    mode: str = "eval",
    rng=None,
) -> LatentTrajectory:
    """Run one sample and return its latent trajectory on the eval grid.

    eval_times defaults to the sample's simulation grid and must contain
    every observation time.  Values at observation times are post-jump; the
    left-limit arrays carry the pre-jump state.
    """
    if eval_times is None:
        eval_times = path.grid_times
    eval_times = np.asarray(eval_times, dtype=np.float64)
    pos = np.searchsorted(eval_times, path.obs_times - TIME_TOL)
    if np.any(np.abs(eval_times[np.clip(pos, 0, len(eval_times) - 1)] - path.obs_times) > 1e-9):
        raise ValueError("eval_times must include every observation time")
    K, d = len(eval_times), path.dim
    values = np.zeros((1, K, d))
    masks = np.zeros((1, K, d), dtype=np.uint8)
    values[0, pos] = path.obs_values
    masks[0, pos] = path.masks
    fwd = forward_batch(
        model,
        eval_times,
        values,
        masks,
        train=(mode == "train"),
        rng=rng,
        record_grid=True,
    )
    n_obs = len(path.obs_times)
    latent_left = np.empty((n_obs, model.cfg.latent_dim))
    output_left = np.empty((n_obs, d))
    latent_left[0] = fwd.h_grid[0, pos[0]]
    output_left[0] = fwd.y_grid[0, pos[0]]
    by_k = {ev.k: ev for ev in fwd.events}
    for j in range(1, n_obs):
        ev = by_k[int(pos[j])]
        latent_left[j] = ev.h_left[0]
        output_left[j] = ev.y_left[0]
    return LatentTrajectory(
        times=eval_times,
        latent=fwd.h_grid[0],
        output=fwd.y_grid[0],
        obs_indices=pos,
        latent_left=latent_left,
        output_left=output_left,
    )
