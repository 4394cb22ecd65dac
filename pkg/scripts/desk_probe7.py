import dataclasses, sys, time
sys.path.insert(0, "/root/pkg/tests")
from desk_configs import desk_config
from njode.trainer import run_training

PROBES = [
    ("corr_bm", dict(activation="relu", batch_size=50, epochs=150, sig_level=3)),
]

for name, overrides in PROBES:
    tag = "probe7_" + name
    cfg = desk_config(name, f"/tmp/{tag}")
    cfg = dataclasses.replace(cfg, **overrides)
    t0 = time.time()
    report = run_training(cfg)
    dt = time.time() - t0
    hist = report.eval_history
    best = min(h[1] for h in hist)
    best_ep = [h for h in hist if h[1] == best][0][0]
    print(f"{name} {overrides}: best {best:.6g} at epoch {best_ep} of {cfg.epochs} ({dt:.0f}s)")
    print("  tail:", [f"{e}:{v:.4g}" for e, v in hist[-8:]], flush=True)
