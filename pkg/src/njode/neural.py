"""Minimal feed-forward networks with exact reverse-mode gradients and Adam.

Everything the model needs from a deep-learning stack, written directly on
numpy: affine layers, tanh/relu activations, inverted dropout on hidden
activations (never on the readout), taped forward passes with hand-rolled
backward, Glorot-uniform initialization, global-norm gradient clipping,
L2-coupled Adam, and a versioned checkpoint format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("tanh", "relu")


@dataclass
class Layer:
    W: np.ndarray  # (out, in)
    b: np.ndarray  # (out,)


def glorot_uniform(rng, fan_out: int, fan_in: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_out, fan_in))


class Mlp:
    """Affine stack with activations and dropout on hidden layers only.

    hidden = [] gives a bare affine map (a linear readout).  Dropout is the
    inverted kind: surviving activations are scaled by 1/(1-rate) in train
    mode so eval mode needs no correction.
    """

    def __init__(
        self,
        in_width: int,
        hidden,
        out_width: int,
        activation: str = "tanh",
        dropout: float = 0.0,
        init_rng=None,
    ):
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        if not 0.0 <= dropout < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        self.in_width = int(in_width)
        self.hidden = [int(h) for h in hidden]
        self.out_width = int(out_width)
        self.activation = activation
        self.dropout = float(dropout)
        rng = init_rng if init_rng is not None else np.random.default_rng()
        widths = [self.in_width] + self.hidden + [self.out_width]
        self.layers = [
            Layer(glorot_uniform(rng, widths[i + 1], widths[i]), np.zeros(widths[i + 1]))
            for i in range(len(widths) - 1)
        ]

    @property
    def linear_readout(self) -> bool:
        """True when the net is a single affine map with no hidden layers."""
        return not self.hidden

    def _act(self, z):
        if self.activation == "tanh":
            return np.tanh(z)
        return np.maximum(z, 0.0)

    def _act_grad_from_output(self, a):
        if self.activation == "tanh":
            return 1.0 - a * a
        return (a > 0).astype(a.dtype)

    def forward(self, x, train: bool = False, rng=None):
        """Returns (output, tape); tape feeds backward().

        Train mode draws one dropout mask per hidden activation entry from
        rng; eval mode is deterministic and ignores rng.
        """
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.shape[1] != self.in_width:
            raise ValueError(
                f"input width {x.shape[1]} does not match net width {self.in_width}"
            )
        use_dropout = train and self.dropout > 0.0 and len(self.hidden) > 0
        if use_dropout and rng is None:
            raise ValueError("train-mode forward with dropout needs an rng")
        inputs, acts, masks = [], [], []
        a = x
        for layer in self.layers[:-1]:
            inputs.append(a)
            z = a @ layer.W.T + layer.b
            a = self._act(z)
            acts.append(a)
            if use_dropout:
                keep = (rng.random(a.shape) >= self.dropout) / (1.0 - self.dropout)
                a = a * keep
                masks.append(keep)
            else:
                masks.append(None)
        inputs.append(a)
        out = a @ self.layers[-1].W.T + self.layers[-1].b
        tape = {
            "net": self,
            "inputs": inputs,
            "acts": acts,
            "masks": masks,
            "squeeze": squeeze,
        }
        return (out[0] if squeeze else out), tape

    def backward(self, tape, upstream):
        """Exact gradients of sum(output * upstream).

        Returns (input gradient, [(dW, db) per layer]).
        """
        if tape.get("net") is not self:
            raise ValueError("tape does not belong to this network")
        up = np.asarray(upstream, dtype=np.float64)
        if tape["squeeze"]:
            up = up[None, :]
        grads = [None] * len(self.layers)
        dz = up
        inp = tape["inputs"][-1]
        grads[-1] = (dz.T @ inp, dz.sum(axis=0))
        da = dz @ self.layers[-1].W
        for li in range(len(self.layers) - 2, -1, -1):
            mask = tape["masks"][li]
            if mask is not None:
                da = da * mask
            a = tape["acts"][li]
            dz = da * self._act_grad_from_output(a)
            inp = tape["inputs"][li]
            grads[li] = (dz.T @ inp, dz.sum(axis=0))
            da = dz @ self.layers[li].W
        dx = da[0] if tape["squeeze"] else da
        return dx, grads


def collect_blocks(nets: dict):
    """Flat named parameter blocks in a deterministic order.

    Returns [(name, array)] with names like "drift.W0"; the arrays are the
    live parameters, so in-place updates train the nets.
    """
    blocks = []
    for name in sorted(nets):
        for li, layer in enumerate(nets[name].layers):
            blocks.append((f"{name}.W{li}", layer.W))
            blocks.append((f"{name}.b{li}", layer.b))
    return blocks


def zero_grads(blocks):
    return [np.zeros_like(arr) for _, arr in blocks]


def clip_global_norm(grads, max_norm: float):
    """Scale the gradient list so its joint 2-norm is at most max_norm."""
    total = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if total <= max_norm or total == 0.0:
        return grads, total
    scale = max_norm / total
    return [g * scale for g in grads], total


@dataclass
class AdamState:
    lr: float
    weight_decay: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def init(cls, blocks, lr: float, weight_decay: float):
        return cls(
            lr=lr,
            weight_decay=weight_decay,
            m=[np.zeros_like(arr) for _, arr in blocks],
            v=[np.zeros_like(arr) for _, arr in blocks],
        )


def adam_step(blocks, grads, state: AdamState) -> None:
    """One Adam update in place; weight decay is added to the gradients.

    The decay term lambda * theta enters before the moment updates (classic
    L2-coupled behavior), bias correction uses the incremented step count.
    """
    if len(grads) != len(blocks):
        raise ValueError("gradient list does not match parameter blocks")
    for (name, _), g in zip(blocks, grads):
        if not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite gradient in block {name}")
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    for i, ((_, p), g) in enumerate(zip(blocks, grads)):
        if state.weight_decay:
            g = g + state.weight_decay * p
        state.m[i] = b1 * state.m[i] + (1 - b1) * g
        state.v[i] = b2 * state.v[i] + (1 - b2) * (g * g)
        m_hat = state.m[i] / (1 - b1**t)
        v_hat = state.v[i] / (1 - b2**t)
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


CHECKPOINT_VERSION = 1


def save_checkpoint(path, nets: dict, state: AdamState, header=None, rng_state=None):
    """Dump parameters, optimizer moments and rng key material to one file.

    numpy's npz container stores float64 exactly, so save -> load -> save is
    an identity.  `header` carries model hyperparameters as JSON.
    """
    blocks = collect_blocks(nets)
    arrays = {f"param:{name}": arr for name, arr in blocks}
    for i, (name, _) in enumerate(blocks):
        arrays[f"adam_m:{name}"] = state.m[i]
        arrays[f"adam_v:{name}"] = state.v[i]
    meta = {
        "format_version": CHECKPOINT_VERSION,
        "step": state.step,
        "lr": state.lr,
        "weight_decay": state.weight_decay,
        "beta1": state.beta1,
        "beta2": state.beta2,
        "eps": state.eps,
        "header": header or {},
        "rng_state": rng_state or {},
    }
    arrays["meta_json"] = np.array(json.dumps(meta, sort_keys=True))
    np.savez(path, **arrays)


def load_checkpoint(path, nets: dict):
    """Restore parameters into `nets`; returns (AdamState, header, rng_state)."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta_json"]))
        if meta["format_version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['format_version']}")
        blocks = collect_blocks(nets)
        state = AdamState(
            lr=meta["lr"],
            weight_decay=meta["weight_decay"],
            beta1=meta["beta1"],
            beta2=meta["beta2"],
            eps=meta["eps"],
            step=meta["step"],
        )
        for name, arr in blocks:
            saved = data[f"param:{name}"]
            if saved.shape != arr.shape:
                raise ValueError(f"shape mismatch for block {name}")
            arr[:] = saved
            state.m.append(data[f"adam_m:{name}"].copy())
            state.v.append(data[f"adam_v:{name}"].copy())
    return state, meta["header"], meta["rng_state"]
