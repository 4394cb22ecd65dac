import dataclasses, sys, time
sys.path.insert(0, "/root/pkg/tests")
from desk_configs import desk_config
from njode.trainer import run_training

PROBES = [
    ("filtering", "lin_drift_j100", dict(activation="relu", batch_size=50, epochs=200,
                                         latent_dim=100, drift_hidden=(), jump_hidden=(100,),
                                         readout_hidden=(), init_hidden=(100,))),
    ("filtering", "lin_drift_j100x2", dict(activation="relu", batch_size=50, epochs=200,
                                           latent_dim=100, drift_hidden=(), jump_hidden=(100, 100),
                                           readout_hidden=(), init_hidden=(100,))),
]

for name, tag, overrides in PROBES:
    cfg = desk_config(name, f"/tmp/probe9_{tag}")
    cfg = dataclasses.replace(cfg, **overrides)
    t0 = time.time()
    report = run_training(cfg)
    dt = time.time() - t0
    hist = report.evals
    best = min(h[1] for h in hist)
    best_ep = [h for h in hist if h[1] == best][0][0]
    print(f"{name} {tag} {overrides}: best {best:.6g} at epoch {best_ep} of {cfg.epochs} ({dt:.0f}s)")
    print("  tail:", [f"{e}:{v:.4g}" for e, v in hist[-8:]], flush=True)
