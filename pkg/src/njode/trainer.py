"""Training harness: config, loop, checkpoints, metric and trajectory files.

One RunConfig describes one run end to end: which process to sample, the
model variant and sizes, the optimizer settings, and where artifacts go.
`run_training` executes it deterministically; identical config and seed
reproduce the metrics file bit for bit.  All randomness flows through
per-purpose keyed streams, so resuming from a checkpoint at epoch k
continues with exactly the random draws the straight run would have used.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .generators import GeneratorSpec, oracle_grid, sample_dataset
from .losses import LOSS_KINDS, batch_loss_and_grads, evaluation_metric
from .model import VARIANTS, ModelConfig, NjOdeModel, forward_batch
from .neural import (
    AdamState,
    adam_step,
    clip_global_norm,
    load_checkpoint,
    save_checkpoint,
)
from .obs_path import PathDataset, load_dataset
from .rngs import keyed_rng

# processes whose train and test splits need different observation schedules
SPLIT_SPECIAL = ("filtering", "lagged_bm")

# offset applied to the seed of a separately generated test set so its
# paths are independent of the training paths
TEST_SEED_OFFSET = 1_000_003

METRICS_HEADER = "epoch,train_loss,test_metric"


@dataclass
class RunConfig:
    """Everything one training run needs, JSON-serializable."""

    generator: GeneratorSpec
    variant: str = "pd-njode"
    latent_dim: int = 50
    drift_hidden: tuple = (50,)
    jump_hidden: tuple = (50,)
    readout_hidden: tuple = (50,)
    init_hidden: tuple = (50,)
    activation: str = "tanh"
    dropout: float = 0.1
    sig_level: int = 2
    lr: float = 0.001
    weight_decay: float = 0.0005
    grad_clip: float = 10.0
    batch_size: int = 200
    epochs: int = 200
    loss_kind: str = "left_error"
    eval_every: int = 1
    n_samples: int = 5000
    train_frac: float = 0.8
    n_plot_samples: int = 4
    seed: int = 0
    out_dir: str | None = None
    train_data: str | None = None
    test_data: str | None = None

    def __post_init__(self):
        if isinstance(self.generator, dict):
            self.generator = GeneratorSpec.from_dict(self.generator)
        for name in ("drift_hidden", "jump_hidden", "readout_hidden", "init_hidden"):
            setattr(self, name, tuple(getattr(self, name)))
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown model variant {self.variant!r}")
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.loss_kind!r}")
        if self.epochs < 0 or self.batch_size < 1 or self.eval_every < 1:
            raise ValueError("epochs, batch_size, eval_every out of range")
        if not 0.0 < self.train_frac < 1.0:
            raise ValueError("train_frac must lie in (0, 1)")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["generator"] = self.generator.to_dict()
        for name in ("drift_hidden", "jump_hidden", "readout_hidden", "init_hidden"):
            d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(**d)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def model_config(self) -> ModelConfig:
        spec = self.generator
        if spec.process in SPLIT_SPECIAL:
            regime, init_coords = "subset", (0,)
        else:
            regime, init_coords = "full", ()
        cfg = ModelConfig(
            dim=spec.dim,
            latent_dim=self.latent_dim,
            drift_hidden=self.drift_hidden,
            jump_hidden=self.jump_hidden,
            readout_hidden=self.readout_hidden,
            init_hidden=self.init_hidden,
            activation=self.activation,
            dropout=self.dropout,
            sig_level=self.sig_level,
            initial_regime=regime,
            init_obs_coords=init_coords,
            step=spec.step,
        )
        return cfg.apply_variant(self.variant)


@dataclass
class RunReport:
    out_dir: str
    best_metric: float
    best_epoch: int
    epochs_run: int
    aborted: bool
    final_train_loss: float | None
    evals: list = field(default_factory=list)  # (epoch, metric) pairs
    metrics_file: str | None = None
    best_checkpoint: str | None = None
    last_checkpoint: str | None = None


def prepare_data(cfg: RunConfig):
    """Training and test datasets for a config, generated or loaded."""
    spec = cfg.generator
    if cfg.train_data:
        train_ds = load_dataset(cfg.train_data)
        if cfg.test_data:
            test_ds = load_dataset(cfg.test_data)
        else:
            train_ds, test_ds = train_ds.split(cfg.train_frac)
        return train_ds, test_ds
    n_train = int(round(cfg.n_samples * cfg.train_frac))
    n_test = cfg.n_samples - n_train
    if n_train < 1 or n_test < 1:
        raise ValueError("n_samples and train_frac leave an empty split")
    if spec.process in SPLIT_SPECIAL:
        train_spec = GeneratorSpec.from_dict({**spec.to_dict(), "split": "train"})
        test_spec = GeneratorSpec.from_dict({**spec.to_dict(), "split": "test"})
        train_ds = sample_dataset(train_spec, n_train, cfg.seed)
        test_ds = sample_dataset(test_spec, n_test, cfg.seed + TEST_SEED_OFFSET)
        return train_ds, test_ds
    ds = sample_dataset(spec, cfg.n_samples, cfg.seed)
    return ds.split(cfg.train_frac)


def model_grid_predictions(
    model: NjOdeModel, ds: PathDataset, batch_size: int = 500
) -> np.ndarray:
    """Eval-mode model output at every grid point, shape (n, K, d)."""
    if ds.dim != model.cfg.dim:
        raise ValueError(
            f"dataset dimension {ds.dim} does not match model dimension "
            f"{model.cfg.dim}"
        )
    out = np.empty_like(ds.values)
    for start in range(0, ds.n_samples, batch_size):
        stop = min(start + batch_size, ds.n_samples)
        fwd = forward_batch(
            model,
            ds.grid_times,
            ds.values[start:stop],
            ds.obs_masks[start:stop],
            train=False,
            record_grid=True,
        )
        out[start:stop] = fwd.y_grid
    return out


def test_metric(model: NjOdeModel, ds: PathDataset, ref: np.ndarray) -> float:
    return evaluation_metric(model_grid_predictions(model, ds), ref)


def write_trajectory_files(out_dir, ds, ref, preds, n_samples):
    """Per-sample CSVs: truth, masks, reference and model prediction."""
    traj_dir = os.path.join(out_dir, "trajectories")
    os.makedirs(traj_dir, exist_ok=True)
    files = []
    d = ds.dim
    cols = ["time"]
    for j in range(d):
        cols += [f"truth{j}", f"obs{j}", f"reference{j}", f"model{j}"]
    for i in range(min(n_samples, ds.n_samples)):
        fn = os.path.join(traj_dir, f"sample_{i:03d}.csv")
        with open(fn, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for k, t in enumerate(ds.grid_times):
                row = [repr(float(t))]
                for j in range(d):
                    row += [
                        repr(float(ds.values[i, k, j])),
                        str(int(ds.obs_masks[i, k, j])),
                        repr(float(ref[i, k, j])),
                        repr(float(preds[i, k, j])),
                    ]
                fh.write(",".join(row) + "\n")
        files.append(fn)
    return files


def _format_metric_row(epoch, train_loss, metric):
    a = "" if train_loss is None else repr(float(train_loss))
    b = "" if metric is None else repr(float(metric))
    return f"{epoch},{a},{b}"


def run_training(cfg: RunConfig, resume_from: str | None = None) -> RunReport:
    """Train a model per config and leave all artifacts in cfg.out_dir.

    Writes metrics.csv (one row per epoch), best.npz at every eval-metric
    improvement, last.npz each epoch, manifest.json, and trajectory CSVs for
    the first few test samples rendered with the best parameters.  A
    non-finite loss or gradient aborts the run, restoring and saving the
    last finished epoch's state as aborted.npz.
    """
    if not cfg.out_dir:
        raise ValueError("config needs an output directory")
    out_dir = cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    train_ds, test_ds = prepare_data(cfg)
    spec = cfg.generator
    ref = oracle_grid(spec, test_ds)
    model_cfg = cfg.model_config()
    model = NjOdeModel.build(model_cfg, cfg.seed)
    blocks = model.blocks()
    state = AdamState.init(blocks, cfg.lr, cfg.weight_decay)
    start_epoch = 0
    if resume_from:
        state, header, _ = load_checkpoint(resume_from, model.nets)
        start_epoch = int(header["epoch"])
        if header.get("model") != model_cfg.to_dict():
            raise ValueError("checkpoint was written for a different model config")

    manifest = {
        "config": cfg.to_dict(),
        "model": model_cfg.to_dict(),
        "train_meta": train_ds.meta,
        "test_meta": test_ds.meta,
        "resume_from": resume_from,
        "start_epoch": start_epoch,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")

    def checkpoint_header(epoch, metric):
        return {
            "epoch": epoch,
            "metric": metric,
            "model": model_cfg.to_dict(),
            "config": cfg.to_dict(),
        }

    metrics_file = os.path.join(out_dir, "metrics.csv")
    best_file = os.path.join(out_dir, "best.npz")
    last_file = os.path.join(out_dir, "last.npz")
    rows = [METRICS_HEADER]
    evals = []

    metric = test_metric(model, test_ds, ref)
    evals.append((start_epoch, metric))
    rows.append(_format_metric_row(start_epoch, None, metric))
    best_metric, best_epoch = metric, start_epoch
    save_checkpoint(best_file, model.nets, state, checkpoint_header(start_epoch, metric))
    save_checkpoint(last_file, model.nets, state, checkpoint_header(start_epoch, metric))

    def snapshot():
        return (
            [arr.copy() for _, arr in blocks],
            [m.copy() for m in state.m],
            [v.copy() for v in state.v],
            state.step,
        )

    def restore(snap):
        params, ms, vs, step = snap
        for (_, arr), saved in zip(blocks, params):
            arr[:] = saved
        state.m = [m.copy() for m in ms]
        state.v = [v.copy() for v in vs]
        state.step = step

    grid = train_ds.grid_times
    n_train = train_ds.n_samples
    aborted = False
    final_train_loss = None
    epochs_run = start_epoch
    last_good = snapshot()
    last_good_epoch = start_epoch

    for epoch in range(start_epoch + 1, cfg.epochs + 1):
        perm = keyed_rng(cfg.seed, "shuffle", epoch).permutation(n_train)
        drop_rng = keyed_rng(cfg.seed, "dropout", epoch)
        loss_sum = 0.0
        try:
            for lo in range(0, n_train, cfg.batch_size):
                idx = perm[lo : lo + cfg.batch_size]
                loss, grads, _ = batch_loss_and_grads(
                    model,
                    grid,
                    train_ds.values[idx],
                    train_ds.obs_masks[idx],
                    kind=cfg.loss_kind,
                    train=True,
                    rng=drop_rng,
                )
                if not math.isfinite(loss):
                    raise FloatingPointError(f"non-finite loss {loss!r}")
                grads, _ = clip_global_norm(grads, cfg.grad_clip)
                adam_step(blocks, grads, state)
                loss_sum += loss * len(idx)
        except (FloatingPointError, ValueError) as err:
            restore(last_good)
            save_checkpoint(
                os.path.join(out_dir, "aborted.npz"),
                model.nets,
                state,
                checkpoint_header(last_good_epoch, best_metric),
            )
            rows.append(f"# aborted at epoch {epoch}: {err}")
            aborted = True
            break
        train_loss = loss_sum / n_train
        final_train_loss = train_loss
        epochs_run = epoch
        metric = None
        if epoch % cfg.eval_every == 0 or epoch == cfg.epochs:
            metric = test_metric(model, test_ds, ref)
            evals.append((epoch, metric))
            if metric < best_metric:
                best_metric, best_epoch = metric, epoch
                save_checkpoint(
                    best_file, model.nets, state, checkpoint_header(epoch, metric)
                )
        rows.append(_format_metric_row(epoch, train_loss, metric))
        save_checkpoint(last_file, model.nets, state, checkpoint_header(epoch, metric))
        last_good = snapshot()
        last_good_epoch = epoch

    with open(metrics_file, "w") as fh:
        fh.write("\n".join(rows) + "\n")

    # render the sample panel with the best parameters seen
    best_model = NjOdeModel.build(model_cfg, cfg.seed)
    load_checkpoint(best_file, best_model.nets)
    preds = model_grid_predictions(best_model, test_ds)
    write_trajectory_files(out_dir, test_ds, ref, preds, cfg.n_plot_samples)

    return RunReport(
        out_dir=out_dir,
        best_metric=best_metric,
        best_epoch=best_epoch,
        epochs_run=epochs_run,
        aborted=aborted,
        final_train_loss=final_train_loss,
        evals=evals,
        metrics_file=metrics_file,
        best_checkpoint=best_file,
        last_checkpoint=last_file,
    )


def evaluate_checkpoint(checkpoint_path: str, dataset, out_dir: str | None = None):
    """Deterministic eval of a saved model on a dataset.

    dataset may be a PathDataset or a dataset file path.  Returns a dict
    with the evaluation metric against the dataset's closed-form reference
    trajectories; when out_dir is given, trajectory CSVs for the first few
    samples are written there as well.
    """
    if isinstance(dataset, str):
        dataset = load_dataset(dataset)
    probe = np.load(checkpoint_path, allow_pickle=False)
    meta = json.loads(str(probe["meta_json"]))
    probe.close()
    header = meta["header"]
    model_cfg = ModelConfig.from_dict(header["model"])
    model = NjOdeModel.build(model_cfg, seed=0)
    load_checkpoint(checkpoint_path, model.nets)
    spec = GeneratorSpec.from_dict(dataset.meta["generator"])
    ref = oracle_grid(spec, dataset)
    preds = model_grid_predictions(model, dataset)
    metric = evaluation_metric(preds, ref)
    result = {
        "metric": metric,
        "n_samples": dataset.n_samples,
        "checkpoint_epoch": header.get("epoch"),
        "trajectory_files": [],
    }
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        n_plot = header.get("config", {}).get("n_plot_samples", 4)
        result["trajectory_files"] = write_trajectory_files(
            out_dir, dataset, ref, preds, n_plot
        )
        with open(os.path.join(out_dir, "evaluation.json"), "w") as fh:
            json.dump(
                {k: v for k, v in result.items() if k != "trajectory_files"},
                fh,
                indent=2,
                sort_keys=True,
            )
            fh.write("\n")
    return result


def run_comparison(base: RunConfig, variants, out_dir: str):
    """Train the same config once per model variant; write a summary table.

    Returns [(variant, RunReport)] in the given order; the table lands in
    out_dir/comparison.csv with one row per variant.
    """
    os.makedirs(out_dir, exist_ok=True)
    results = []
    for variant in variants:
        sub = dataclasses.replace(
            base,
            variant=variant,
            out_dir=os.path.join(out_dir, variant.replace("+", "_")),
        )
        results.append((variant, run_training(sub)))
    table = os.path.join(out_dir, "comparison.csv")
    with open(table, "w") as fh:
        fh.write("variant,best_metric,best_epoch,epochs_run\n")
        for variant, rep in results:
            fh.write(
                f"{variant},{repr(rep.best_metric)},{rep.best_epoch},"
                f"{rep.epochs_run}\n"
            )
    return results
