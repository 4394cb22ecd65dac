import dataclasses, sys, time
sys.path.insert(0, "/root/pkg/tests")
from desk_configs import desk_config
from njode.trainer import run_training

PROBES = [
    ("lagged_bm", "shrunk", dict(batch_size=50, epochs=100,
                                 latent_dim=100, drift_hidden=(100,), jump_hidden=(100,),
                                 readout_hidden=(), init_hidden=(100,))),
    ("lagged_bm", "paper_arch", dict(batch_size=50, epochs=100)),
]

for name, tag, overrides in PROBES:
    cfg = desk_config(name, f"/tmp/probe11_{tag}")
    cfg = dataclasses.replace(cfg, **overrides)
    t0 = time.time()
    report = run_training(cfg)
    dt = time.time() - t0
    hist = report.evals
    best = min(h[1] for h in hist)
    best_ep = [h for h in hist if h[1] == best][0][0]
    print(f"{name} {tag}: best {best:.6g} at epoch {best_ep} of {cfg.epochs} ({dt:.0f}s)")
    print("  tail:", [f"{e}:{v:.4g}" for e, v in hist[-8:]], flush=True)
