import dataclasses, sys, time
sys.path.insert(0, "/root/pkg/tests")
from desk_configs import desk_config
from njode.trainer import run_training

PROBES = [
    ("filtering", dict(activation="relu", batch_size=50, epochs=250,
                       latent_dim=50, jump_hidden=(50,), drift_hidden=(50,),
                       readout_hidden=())),
    ("filtering", dict(activation="relu", batch_size=50, epochs=250, dropout=0.1,
                       latent_dim=100, jump_hidden=(100,), drift_hidden=(100,),
                       readout_hidden=())),
]

for name, overrides in PROBES:
    small = overrides.get("latent_dim", 0)
    tag = f"probe8_{name}_{small}"
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
