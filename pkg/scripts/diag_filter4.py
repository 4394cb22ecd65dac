"""Can a plain MLP on the jump-net features learn the filtering signal map?

Collects (running signature, t) -> true signal at every train event where the
signal is revealed, fits an MLP with the package's own substrate, and compares
the residual MSE against the oracle's irreducible noise floor.
"""

import sys

sys.path.insert(0, "/root/pkg/tests")

import numpy as np
from desk_configs import desk_config
from njode.generators import oracle_trajectory, sample_dataset
from njode.neural import AdamState, Mlp, collect_blocks
from njode.rngs import keyed_rng
from njode.signature import extend_batch, sig_dim

cfg = desk_config("filtering", "/tmp/na")
spec = cfg.generator
ds = sample_dataset(spec, 4000, 0)

LEVEL = 2
PATH_DIM = 3  # time + 2 coords
WIDTH = sig_dim(PATH_DIM, LEVEL)

feats = []
targets = []
oracle_post = []
for i in range(ds.n_samples):
    path = ds.path(i)
    if len(path.obs_times) <= 1:
        continue
    orc = oracle_trajectory(spec, path, eval_times=path.obs_times)
    sig = np.zeros((1, WIDTH))
    sig[0, 0] = 1.0
    ff = (path.obs_values[0] * path.masks[0]).copy()
    tau = 0.0
    for j in range(1, len(path.obs_times)):
        t = path.obs_times[j]
        m = path.masks[j]
        new_ff = np.where(m > 0, path.obs_values[j], ff)
        inc = np.concatenate([[t - tau], new_ff - ff])[None, :]
        sig = extend_batch(sig, inc, dim=PATH_DIM, level=LEVEL)
        ff, tau = new_ff, t
        if m[1] > 0:  # signal revealed: a directly supervised jump event
            feats.append(np.concatenate([[t], sig[0]]))
            targets.append(path.obs_values[j][1])
            oracle_post.append(orc.values[j][1])

X = np.array(feats)
y = np.array(targets)
orc_y = np.array(oracle_post)
print("events:", len(y), "feature width:", X.shape[1])
floor = float(np.mean((y - orc_y) ** 2))
print("oracle residual MSE (floor):", round(floor, 5))
print("zero-predictor MSE        :", round(float(np.mean(y ** 2)), 5))

rng = keyed_rng(1234, "mlpfit")
net = Mlp.build("probe", X.shape[1], (100,), 1, activation="relu", seed=77)
blocks = net.blocks() if hasattr(net, "blocks") else collect_blocks({"n": net})
state = AdamState.init(blocks, 0.001, 0.0)
n = len(y)
for epoch in range(80):
    order = rng.permutation(n)
    for s in range(0, n, 256):
        idx = order[s : s + 256]
        out, cache = net.forward(X[idx], train=True, rng=rng)
        resid = out[:, 0] - y[idx]
        d_out = (2.0 / len(idx)) * resid[:, None]
        _, grads = net.backward(cache, d_out)
        state.update(blocks, grads)
    if epoch % 20 == 19 or epoch == 0:
        pred, _ = net.forward(X)
        mse = float(np.mean((pred[:, 0] - y) ** 2))
        vs_oracle = float(np.mean((pred[:, 0] - orc_y) ** 2))
        print(f"epoch {epoch+1}: train MSE {mse:.5f} (excess {mse-floor:+.5f}), vs-oracle {vs_oracle:.5f}")
