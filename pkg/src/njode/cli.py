"""Command line entry points.

Four verbs: `generate` writes a dataset file from a config's generator
section, `train` runs one training config end to end, `evaluate` scores a
checkpoint against a dataset file, and `compare` trains the same config
once per model variant and tabulates the results.  Training and comparison
render their figures automatically; everything lands under --out.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .generators import sample_dataset
from .model import VARIANTS
from .obs_path import save_dataset
from .plots import plot_comparison, render_run
from .trainer import RunConfig, evaluate_checkpoint, run_comparison, run_training


def _load_config(path: str):
    with open(path) as fh:
        return json.load(fh)


def _config_with_overrides(args) -> RunConfig:
    raw = _load_config(args.config)
    raw.pop("variants", None)
    cfg = RunConfig.from_dict(raw)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if getattr(args, "epochs", None) is not None:
        updates["epochs"] = args.epochs
    if args.out is not None:
        updates["out_dir"] = args.out
    return dataclasses.replace(cfg, **updates) if updates else cfg


def cmd_generate(args) -> int:
    cfg = _config_with_overrides(args)
    if not args.out:
        print("generate: --out FILE is required", file=sys.stderr)
        return 2
    ds = sample_dataset(cfg.generator, cfg.n_samples, cfg.seed)
    out = args.out
    parent = os.path.dirname(out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    save_dataset(ds, out)
    print(
        f"wrote {ds.n_samples} samples of {cfg.generator.process} "
        f"(dim {ds.dim}, {len(ds.grid_times)} grid points) to {out}"
    )
    return 0


def cmd_train(args) -> int:
    cfg = _config_with_overrides(args)
    report = run_training(cfg, resume_from=args.resume)
    figures = render_run(report.out_dir)
    status = "aborted" if report.aborted else "finished"
    print(f"{status}: {report.epochs_run} epochs in {report.out_dir}")
    print(f"best eval metric {report.best_metric:.6g} at epoch {report.best_epoch}")
    print(f"metrics: {report.metrics_file}")
    print(f"checkpoint: {report.best_checkpoint}")
    for fig in figures:
        print(f"figure: {fig}")
    return 1 if report.aborted else 0


def cmd_evaluate(args) -> int:
    result = evaluate_checkpoint(args.checkpoint, args.dataset, out_dir=args.out)
    print(f"eval metric {result['metric']:.6g} on {result['n_samples']} samples")
    if args.out:
        for fn in render_run(args.out):
            print(f"figure: {fn}")
    return 0


def cmd_compare(args) -> int:
    raw = _load_config(args.config)
    variants = raw.pop("variants", list(VARIANTS))
    cfg = RunConfig.from_dict(raw)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.epochs is not None:
        updates["epochs"] = args.epochs
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
    out = args.out or cfg.out_dir
    if not out:
        print("compare: --out DIR is required", file=sys.stderr)
        return 2
    results = run_comparison(cfg, variants, out)
    for variant, rep in results:
        render_run(rep.out_dir)
    plot_comparison(
        {v: rep.out_dir for v, rep in results},
        os.path.join(out, "comparison.png"),
    )
    print(f"comparison table: {os.path.join(out, 'comparison.csv')}")
    width = max(len(v) for v in variants)
    for variant, rep in results:
        print(
            f"{variant.ljust(width)}  best {rep.best_metric:.6g} "
            f"at epoch {rep.best_epoch}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="njode",
        description="Online forecasting of irregularly observed processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample a dataset file from a config")
    gen.add_argument("--config", required=True, help="run config JSON")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", required=True, help="dataset file to write")
    gen.set_defaults(func=cmd_generate)

    tr = sub.add_parser("train", help="train one config end to end")
    tr.add_argument("--config", required=True, help="run config JSON")
    tr.add_argument("--seed", type=int, default=None)
    tr.add_argument("--epochs", type=int, default=None)
    tr.add_argument("--out", default=None, help="output directory override")
    tr.add_argument("--resume", default=None, help="checkpoint to resume from")
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("evaluate", help="score a checkpoint on a dataset file")
    ev.add_argument("checkpoint")
    ev.add_argument("dataset")
    ev.add_argument("--out", default=None, help="directory for CSVs and figures")
    ev.set_defaults(func=cmd_evaluate)

    cmp_ = sub.add_parser("compare", help="train every model variant and tabulate")
    cmp_.add_argument("--config", required=True, help="run config JSON")
    cmp_.add_argument("--seed", type=int, default=None)
    cmp_.add_argument("--epochs", type=int, default=None)
    cmp_.add_argument("--out", default=None, help="output directory")
    cmp_.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
