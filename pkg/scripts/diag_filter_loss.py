"""Compare the filtering train loss of the trained model against the oracle."""

import sys

sys.path.insert(0, "/root/pkg/tests")

import numpy as np
from desk_configs import desk_config
from njode.generators import GeneratorSpec, oracle_trajectory, sample_dataset
from njode.losses import batch_loss, event_terms
from njode.model import NjOdeModel, forward_batch
from njode.neural import load_checkpoint

cfg = desk_config("filtering", "/tmp/probe3_filtering", seed=0)
spec = cfg.generator
n_train = int(round(cfg.n_samples * cfg.train_frac))
train_ds = sample_dataset(spec, n_train, cfg.seed)

model_cfg = cfg.model_config()
model = NjOdeModel.build(model_cfg, cfg.seed)
load_checkpoint("/tmp/probe3_filtering/best.npz", model.nets)

B = train_ds.n_samples
fwd = forward_batch(model, train_ds.grid_times, train_ds.values, train_ds.obs_masks, train=False)
model_loss = batch_loss(fwd, "left_error")
print("model train loss :", model_loss)

# oracle loss with identical weighting: per sample, post and left conditional
# means at each observation time
total = 0.0
sig_events = 0
all_events = 0
for i in range(B):
    path = train_ds.path(i)
    if len(path.obs_times) <= 1:
        continue
    post = oracle_trajectory(spec, path, eval_times=path.obs_times)
    n_post = len(path.obs_times) - 1
    w = 1.0 / (n_post * B)
    for j in range(1, len(path.obs_times)):
        x = path.obs_values[j]
        m = path.masks[j]
        terms = event_terms(
            x[None, :], m[None, :], post.values[j][None, :], post.left_values[j][None, :],
            "left_error",
        )
        total += w * terms[0]
        all_events += 1
        if m[1] > 0:
            sig_events += 1
print("oracle train loss:", total)
print("events:", all_events, "with signal observed:", sig_events)
