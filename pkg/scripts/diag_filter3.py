"""At-event signal error on train-style paths, split by history content."""

import dataclasses
import sys

sys.path.insert(0, "/root/pkg/tests")

import numpy as np
from desk_configs import desk_config
from njode.generators import oracle_grid, sample_dataset
from njode.model import NjOdeModel
from njode.neural import load_checkpoint
from njode.trainer import model_grid_predictions

cfg = desk_config("filtering", "/tmp/probe4_filtering")
cfg = dataclasses.replace(cfg, activation="relu", batch_size=100)
spec = cfg.generator  # train split

ds = sample_dataset(spec, 1000, 999_001)
ref = oracle_grid(spec, ds)

model = NjOdeModel.build(cfg.model_config(), cfg.seed)
load_checkpoint("/tmp/probe4_filtering/best.npz", model.nets)
preds = model_grid_predictions(model, ds)

err_sig = (preds[:, :, 1] - ref[:, :, 1]) ** 2  # signal coordinate
obs = ds.obs_masks[:, :, 0] > 0
sig_seen = np.zeros_like(obs)
for i in range(ds.n_samples):
    seen = False
    for k in range(obs.shape[1]):
        if obs[i, k]:
            sig_seen[i, k] = seen  # history strictly before this event
            if ds.obs_masks[i, k, 1] > 0:
                seen = True

ev = obs
fresh = ev & ~sig_seen  # events with signal-free history (test-like)
stale = ev & sig_seen
print("train-style at-event signal err, signal-free history:", err_sig[fresh].mean(), f"({fresh.sum()} rows)")
print("train-style at-event signal err, signal in history  :", err_sig[stale].mean(), f"({stale.sum()} rows)")
print("train-style grid signal err overall                 :", err_sig.mean())
