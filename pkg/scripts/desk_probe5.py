"""Fifth round: weight decay off for the sparse cross-supervision task."""

import dataclasses
import sys
import time

sys.path.insert(0, "tests")

from desk_configs import desk_config
from njode.trainer import run_training

PROBES = [
    ("filtering", dict(activation="relu", batch_size=100, epochs=120, weight_decay=0.0)),
]


def main():
    for name, overrides in PROBES:
        tag = name.replace("+", "_").replace("-", "_")
        cfg = desk_config(name, f"/tmp/probe5_{tag}")
        cfg = dataclasses.replace(cfg, **overrides)
        t0 = time.time()
        report = run_training(cfg)
        dt = time.time() - t0
        print(
            f"{name} {overrides}: best {report.best_metric:.6g} "
            f"at epoch {report.best_epoch} of {cfg.epochs} ({dt:.0f}s)",
            flush=True,
        )
        tail = ", ".join(f"{ep}:{m:.4g}" for ep, m in report.evals[-8:])
        print(f"  tail {tail}", flush=True)


if __name__ == "__main__":
    main()
