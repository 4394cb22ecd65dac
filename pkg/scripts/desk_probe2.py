"""Second tuning round: longer runs and hyperparameter probes."""

import dataclasses
import sys
import time

sys.path.insert(0, "tests")

from desk_configs import desk_config
from njode.trainer import run_training

PROBES = [
    ("ppp", 30, dict(batch_size=100)),
    ("bm_square", 80, {}),
    ("bs_state", 60, {}),
    ("corr_bm", 100, {}),
    ("filtering", 60, {}),
    ("lagged_bm", 30, {}),
    ("fbm_njode", 20, {}),
    ("pendulum", 40, {}),
]


def main():
    for name, epochs, overrides in PROBES:
        tag = name.replace("+", "_")
        cfg = desk_config(name, f"/tmp/probe2_{tag}", epochs=epochs)
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
        t0 = time.time()
        report = run_training(cfg)
        dt = time.time() - t0
        print(
            f"{name} {overrides or ''}: best {report.best_metric:.6g} "
            f"at epoch {report.best_epoch} ({dt:.0f}s)",
            flush=True,
        )
        tail = ", ".join(f"{ep}:{m:.4g}" for ep, m in report.evals[-8:])
        print(f"  tail {tail}", flush=True)


if __name__ == "__main__":
    main()
