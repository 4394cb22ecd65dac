"""Run one desk-scale config for a few epochs and report timing/metrics."""

import sys
import time

sys.path.insert(0, "tests")

from desk_configs import desk_config


def main():
    name = sys.argv[1]
    epochs = int(sys.argv[2]) if len(sys.argv) > 2 else 3
    out = sys.argv[3] if len(sys.argv) > 3 else f"/tmp/smoke_{name}"
    t0 = time.time()
    cfg = desk_config(name, out, epochs=epochs)
    from njode.trainer import run_training

    report = run_training(cfg)
    dt = time.time() - t0
    print(f"{name}: {epochs} epochs in {dt:.1f}s ({dt / max(epochs, 1):.1f}s/epoch)")
    print(f"  best metric {report.best_metric:.6g} at epoch {report.best_epoch}")
    for ep, metric in report.evals:
        print(f"    epoch {ep}: {metric:.6g}")


if __name__ == "__main__":
    main()
