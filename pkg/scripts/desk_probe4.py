"""Fourth tuning round: relu nets for the Gaussian cross-prediction tasks,
longer budgets for the runs that were still descending at round-3 cutoff."""

import dataclasses
import sys
import time

sys.path.insert(0, "tests")

from desk_configs import desk_config
from njode.trainer import run_training

PROBES = [
    ("filtering", dict(activation="relu", batch_size=100, epochs=120)),
    ("corr_bm", dict(activation="relu", epochs=100)),
    ("lagged_bm", dict(epochs=60)),
    ("pendulum", dict(epochs=80)),
]


def main():
    for name, overrides in PROBES:
        tag = name.replace("+", "_").replace("-", "_")
        cfg = desk_config(name, f"/tmp/probe4_{tag}")
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
