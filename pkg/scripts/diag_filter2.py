"""Split the filtering eval error into at-event and between-event parts."""

import sys

sys.path.insert(0, "/root/pkg/tests")

import numpy as np
from desk_configs import desk_config
from njode.generators import GeneratorSpec, oracle_grid, sample_dataset
from njode.model import NjOdeModel
from njode.neural import load_checkpoint
from njode.trainer import TEST_SEED_OFFSET, model_grid_predictions

import dataclasses

cfg = desk_config("filtering", "/tmp/probe4_filtering")
cfg = dataclasses.replace(cfg, activation="relu", batch_size=100)
spec = cfg.generator
test_spec = GeneratorSpec.from_dict({**spec.to_dict(), "split": "test"})
n_test = cfg.n_samples - int(round(cfg.n_samples * cfg.train_frac))
test_ds = sample_dataset(test_spec, n_test, cfg.seed + TEST_SEED_OFFSET)
ref = oracle_grid(spec, test_ds)

model = NjOdeModel.build(cfg.model_config(), cfg.seed)
load_checkpoint("/tmp/probe4_filtering/best.npz", model.nets)
preds = model_grid_predictions(model, test_ds)

err = (preds - ref) ** 2  # (n, K, d)
obs = test_ds.obs_masks[:, :, 0] > 0  # sensor observed = an event row
print("grid metric per coord      :", err.mean(axis=(0, 1)))
print("at-event rows per coord    :", err[obs].mean(axis=0), f"({obs.sum()} rows)")
print("between-event rows per coord:", err[~obs].mean(axis=0), f"({(~obs).sum()} rows)")

# where between events does the error accumulate: bucket by steps since obs
n, K, d = err.shape
since = np.zeros((n, K), dtype=int)
for i in range(n):
    c = 0
    for k in range(K):
        c = 0 if obs[i, k] else c + 1
        since[i, k] = c
for lo, hi in [(1, 3), (4, 10), (11, 30), (31, 200)]:
    sel = (since >= lo) & (since <= hi)
    if sel.any():
        print(f"steps-since-obs {lo:>2}-{hi:<3}: signal err {err[:, :, 1][sel].mean():.4f}  ({sel.sum()} rows)")
