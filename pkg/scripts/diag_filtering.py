"""Per-coordinate error decomposition for the filtering desk run."""

import sys

sys.path.insert(0, "/root/pkg/tests")

import numpy as np
from desk_configs import desk_config
from njode.generators import GeneratorSpec, oracle_grid, sample_dataset
from njode.model import NjOdeModel
from njode.neural import load_checkpoint
from njode.trainer import TEST_SEED_OFFSET, AdamState, model_grid_predictions

cfg = desk_config("filtering", "/tmp/probe3_filtering", seed=0)
spec = cfg.generator
test_spec = GeneratorSpec.from_dict({**spec.to_dict(), "split": "test"})
n_train = int(round(cfg.n_samples * cfg.train_frac))
n_test = cfg.n_samples - n_train
test_ds = sample_dataset(test_spec, n_test, cfg.seed + TEST_SEED_OFFSET)
ref = oracle_grid(spec, test_ds)

model_cfg = cfg.model_config()
model = NjOdeModel.build(model_cfg, cfg.seed)
load_checkpoint("/tmp/probe3_filtering/best.npz", model.nets)
preds = model_grid_predictions(model, test_ds)

diff = preds - ref
per_coord = (diff ** 2).mean(axis=(0, 1))
print("model metric per coord :", per_coord, "total", per_coord.sum())

# trivial baseline: sensor forward-filled from its own observations,
# signal held at zero
n, K, d = test_ds.values.shape
triv = np.zeros_like(test_ds.values)
for i in range(n):
    last = test_ds.values[i, 0].copy()
    for k in range(K):
        m = test_ds.obs_masks[i, k].astype(bool)
        last[m] = test_ds.values[i, k, m]
        triv[i, k] = last
triv[:, :, 1] = 0.0
tdiff = triv - ref
t_per_coord = (tdiff ** 2).mean(axis=(0, 1))
print("trivial metric per coord:", t_per_coord, "total", t_per_coord.sum())

# one sample textual trace
i = 0
obs_k = np.where(test_ds.obs_masks[i, :, 0] > 0)[0]
print("obs grid idx:", obs_k[:12])
for k in range(0, K, max(1, K // 12)):
    print(
        f"t={test_ds.grid_times[k]:.2f} truth=({test_ds.values[i,k,0]:+.3f},{test_ds.values[i,k,1]:+.3f})"
        f" ref=({ref[i,k,0]:+.3f},{ref[i,k,1]:+.3f})"
        f" model=({preds[i,k,0]:+.3f},{preds[i,k,1]:+.3f})"
    )
