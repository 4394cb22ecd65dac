"""PPP recipe probes against the 30-epoch metric target."""

import dataclasses
import sys

sys.path.insert(0, "tests")

from desk_configs import desk_config
from njode.trainer import run_training

CASES = [
    dict(batch_size=100, dropout=0.0),
    dict(batch_size=200, dropout=0.0, lr=0.002),
    dict(batch_size=50, dropout=0.0),
]

for i, overrides in enumerate(CASES):
    cfg = dataclasses.replace(
        desk_config("ppp", f"/tmp/ppp_probe_{i}", epochs=30), **overrides
    )
    report = run_training(cfg)
    print(f"{overrides}: best {report.best_metric:.6g} at {report.best_epoch}", flush=True)
    tail = ", ".join(f"{ep}:{m:.4g}" for ep, m in report.evals[-6:])
    print(f"  tail {tail}", flush=True)
