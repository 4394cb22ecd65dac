"""Third tuning round: the dropout-free desk recipes at candidate epochs."""

import sys
import time

sys.path.insert(0, "tests")

from desk_configs import desk_config
from njode.trainer import run_training

PROBES = [
    ("bm_square", 80),
    ("bs_state", 60),
    ("corr_bm", 80),
    ("filtering", 60),
    ("lagged_bm", 30),
    ("fbm_njode", 25),
    ("fbm_pd-njode", 25),
    ("pendulum", 40),
]


def main():
    for name, epochs in PROBES:
        tag = name.replace("+", "_").replace("-", "_")
        cfg = desk_config(name, f"/tmp/probe3_{tag}", epochs=epochs)
        t0 = time.time()
        report = run_training(cfg)
        dt = time.time() - t0
        print(
            f"{name}: best {report.best_metric:.6g} at epoch {report.best_epoch} "
            f"of {epochs} ({dt:.0f}s)",
            flush=True,
        )
        tail = ", ".join(f"{ep}:{m:.4g}" for ep, m in report.evals[-8:])
        print(f"  tail {tail}", flush=True)


if __name__ == "__main__":
    main()
