import json

import numpy as np
import pytest

from njode.cli import main
from njode.generators import GeneratorSpec
from njode.obs_path import load_dataset
from njode.plots import plot_comparison, plot_metrics, plot_trajectory, render_run
from njode.trainer import RunConfig


@pytest.fixture
def config_file(tmp_path):
    cfg = RunConfig(
        generator=GeneratorSpec("ou"),
        latent_dim=8,
        drift_hidden=(8,),
        jump_hidden=(8,),
        readout_hidden=(),
        dropout=0.0,
        batch_size=16,
        epochs=1,
        n_samples=30,
        n_plot_samples=2,
        seed=4,
    )
    fn = str(tmp_path / "cfg.json")
    cfg.save(fn)
    return fn


def test_generate_writes_loadable_dataset(tmp_path, config_file, capsys):
    out = str(tmp_path / "data.csv")
    assert main(["generate", "--config", config_file, "--out", out]) == 0
    ds = load_dataset(out)
    assert ds.n_samples == 30
    assert ds.meta["generator"]["process"] == "ou"
    assert "wrote 30 samples" in capsys.readouterr().out


def test_generate_seed_override(tmp_path, config_file):
    a = str(tmp_path / "a.csv")
    b = str(tmp_path / "b.csv")
    main(["generate", "--config", config_file, "--out", a])
    main(["generate", "--config", config_file, "--seed", "99", "--out", b])
    assert not np.array_equal(load_dataset(a).values, load_dataset(b).values)


def test_train_verb(tmp_path, config_file, capsys):
    out = str(tmp_path / "run")
    code = main(["train", "--config", config_file, "--out", out])
    assert code == 0
    text = capsys.readouterr().out
    assert "best eval metric" in text
    assert (tmp_path / "run" / "metrics.csv").exists()
    assert (tmp_path / "run" / "best.npz").exists()
    assert (tmp_path / "run" / "figures" / "metrics.png").exists()
    assert (tmp_path / "run" / "figures" / "sample_000.png").exists()


def test_train_epoch_override(tmp_path, config_file):
    out = str(tmp_path / "run0")
    main(["train", "--config", config_file, "--epochs", "0", "--out", out])
    lines = open(tmp_path / "run0" / "metrics.csv").read().strip().split("\n")
    assert len(lines) == 2


def test_evaluate_verb(tmp_path, config_file, capsys):
    run = str(tmp_path / "run")
    main(["train", "--config", config_file, "--out", run])
    data = str(tmp_path / "data.csv")
    main(["generate", "--config", config_file, "--seed", "77", "--out", data])
    capsys.readouterr()
    out = str(tmp_path / "eval")
    code = main(
        ["evaluate", str(tmp_path / "run" / "best.npz"), data, "--out", out]
    )
    assert code == 0
    assert "eval metric" in capsys.readouterr().out
    assert (tmp_path / "eval" / "evaluation.json").exists()
    assert (tmp_path / "eval" / "figures").exists()


def test_compare_verb(tmp_path, config_file, capsys):
    raw = json.load(open(config_file))
    raw["variants"] = ["njode", "njode+sig"]
    cfg2 = str(tmp_path / "cmp.json")
    json.dump(raw, open(cfg2, "w"))
    out = str(tmp_path / "cmp")
    code = main(["compare", "--config", cfg2, "--out", out])
    assert code == 0
    text = capsys.readouterr().out
    assert "comparison table" in text
    table = open(tmp_path / "cmp" / "comparison.csv").read().strip().split("\n")
    assert len(table) == 3
    assert (tmp_path / "cmp" / "comparison.png").exists()
    assert (tmp_path / "cmp" / "njode" / "figures" / "metrics.png").exists()


def test_plot_helpers_render_files(tmp_path, config_file):
    run = str(tmp_path / "run")
    main(["train", "--config", config_file, "--out", run])
    made = render_run(run)
    assert all((tmp_path / "run" / "figures").exists() for _ in made)
    png = plot_metrics(str(tmp_path / "run" / "metrics.csv"), str(tmp_path / "m.png"))
    assert (tmp_path / "m.png").stat().st_size > 0
    traj = str(tmp_path / "run" / "trajectories" / "sample_000.csv")
    plot_trajectory(traj, str(tmp_path / "t.png"))
    assert (tmp_path / "t.png").stat().st_size > 0
    plot_comparison({"run": run}, str(tmp_path / "c.png"))
    assert (tmp_path / "c.png").stat().st_size > 0
    assert png.endswith("m.png")
