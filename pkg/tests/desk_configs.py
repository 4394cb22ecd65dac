"""Desk-scale experiment configurations used by the acceptance suite.

Each entry reproduces one reference experiment at reduced sample count
(4000 train / 1000 test paths).  The architecture settings follow the
full-scale recipes.  Batch sizes and epoch counts are rescaled so the
reduced runs see optimizer step counts comparable to the full-scale
training (a 4000-path epoch at batch 200 is only 20 steps, so the harder
experiments train at batch 50 for 100-200 epochs instead).
"""

import math

from njode.generators import GeneratorSpec
from njode.trainer import RunConfig


def desk_config(name, out_dir, seed=0, epochs=None):
    base = dict(
        n_samples=5000,
        train_frac=0.8,
        batch_size=200,
        lr=0.001,
        weight_decay=0.0005,
        # at 4000 training paths the dropout noise costs more eval metric
        # than the regularisation buys; the reduced-scale runs train clean
        dropout=0.0,
        eval_every=1,
        n_plot_samples=2,
        seed=seed,
        out_dir=out_dir,
    )
    recipes = {
        "ppp": dict(
            generator=GeneratorSpec("poisson"),
            variant="njode",
            latent_dim=10,
            drift_hidden=(50, 50),
            jump_hidden=(50, 50),
            readout_hidden=(50, 50),
            batch_size=100,
            epochs=30,
        ),
        "bm_square": dict(
            generator=GeneratorSpec("bm_square"),
            variant="njode",
            latent_dim=50,
            drift_hidden=(50,),
            jump_hidden=(50,),
            readout_hidden=(),
            epochs=60,
        ),
        "bs_state": dict(
            generator=GeneratorSpec("black_scholes", intensity_mode="state"),
            variant="pd-njode",
            latent_dim=50,
            drift_hidden=(50, 50),
            jump_hidden=(50, 50),
            readout_hidden=(50, 50),
            sig_level=3,
            epochs=60,
        ),
        "corr_bm": dict(
            generator=GeneratorSpec("corr_bm", mask_intensity=math.inf),
            variant="pd-njode",
            latent_dim=100,
            drift_hidden=(100,),
            jump_hidden=(100,),
            readout_hidden=(),
            activation="relu",
            sig_level=2,
            batch_size=50,
            epochs=150,
        ),
        "filtering": dict(
            generator=GeneratorSpec("filtering"),
            variant="pd-njode",
            latent_dim=200,
            drift_hidden=(100,),
            jump_hidden=(100,),
            readout_hidden=(100,),
            init_hidden=(100,),
            sig_level=2,
            epochs=30,
        ),
        "lagged_bm": dict(
            generator=GeneratorSpec("lagged_bm"),
            variant="pd-njode",
            latent_dim=400,
            drift_hidden=(200,),
            jump_hidden=(200,),
            readout_hidden=(),
            init_hidden=(200,),
            activation="relu",
            sig_level=2,
            epochs=30,
        ),
        "pendulum": dict(
            generator=GeneratorSpec("pendulum", horizon=2.5, step=0.025),
            variant="njode+rnn",
            latent_dim=400,
            drift_hidden=(200,),
            jump_hidden=(200,),
            readout_hidden=(200,),
            epochs=30,
        ),
    }
    for variant in ("njode", "njode+sig", "njode+rnn", "pd-njode"):
        recipes[f"fbm_{variant}"] = dict(
            generator=GeneratorSpec("fbm"),
            variant=variant,
            latent_dim=50,
            drift_hidden=(200, 200),
            jump_hidden=(200, 200),
            readout_hidden=(200, 200),
            sig_level=3,
            epochs=50,
        )
    recipes["fbm_loss_original"] = dict(
        recipes["fbm_njode+sig"], loss_kind="jump_size"
    )
    cfg = dict(base, **recipes[name])
    if epochs is not None:
        cfg["epochs"] = epochs
    return RunConfig(**cfg)
