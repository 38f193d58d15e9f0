"""Seed derivation, method runs, aggregation and sweeps."""

import numpy as np
import pytest

from tsslab.errors import UsageError
from tsslab.io.checkpoints import load_checkpoint
from tsslab.io.reports import read_json
from tsslab.schemas.experiments import RunResult
from tsslab.schemas.noise import NoiseSpec
from tsslab.schemas.training import TrainConfig, TssConfig
from tsslab.services import TssServices
from tsslab.services.experiments import (
    aggregate,
    apply_cell,
    cell_key,
    derive_seed,
    expand_grid,
    noisy_labels_for,
    run_experiment,
    run_method,
    run_seeds,
    run_sweep,
    seeded_config,
)


def tiny_config(**overrides):
    base = dict(T=6, pretrain_epochs=10, patience=None, train=TrainConfig(epochs=10))
    base.update(overrides)
    return TssConfig(**base)


NOISE = NoiseSpec(kind="symmetric", rate=0.3)


def test_derived_seeds_are_stable_and_distinct():
    assert derive_seed(7, "noise") == derive_seed(7, "noise")
    assert derive_seed(7, "noise") != derive_seed(7, "split")
    assert derive_seed(7, "noise") != derive_seed(8, "noise")
    seeds = run_seeds(3, 5)
    assert seeds == run_seeds(3, 5)
    assert len(set(seeds)) == 5
    with pytest.raises(UsageError):
        run_seeds(3, 0)


def test_seeded_config_changes_only_seeds():
    config = tiny_config(lambda0=0.3)
    seeded = seeded_config(config, 11)
    assert seeded.lambda0 == 0.3
    assert seeded.seed == derive_seed(11, "split")
    assert seeded.train.seed == derive_seed(11, "init")
    assert seeded.train.epochs == 10


def test_noisy_labels_for_prefers_attached_labels(small_sbm):
    attached = small_sbm.with_noisy_labels(np.zeros(small_sbm.n, dtype=np.int64))
    assert np.all(noisy_labels_for(attached, None, 1) == 0)
    assert np.array_equal(noisy_labels_for(small_sbm, None, 1), small_sbm.clean_labels)
    first = noisy_labels_for(small_sbm, NOISE, 1)
    assert np.array_equal(first, noisy_labels_for(small_sbm, NOISE, 1))
    assert not np.array_equal(first, noisy_labels_for(small_sbm, NOISE, 2))


def test_run_method_plain_and_tss(small_sbm):
    labels = noisy_labels_for(small_sbm, NOISE, 4)
    plain = run_method(small_sbm, labels, "plain", tiny_config(), seed=4)
    assert plain.result.method == "plain"
    assert plain.history is not None and plain.trace is None
    assert plain.extraction == []
    assert 0.0 <= plain.result.test_acc <= 1.0

    tss = run_method(small_sbm, labels, "tss", tiny_config(), seed=4)
    assert tss.trace is not None
    assert tss.result.epochs_run == 6
    assert len(tss.extraction) == 6


def test_plain_uses_patience_fallback(small_sbm):
    labels = noisy_labels_for(small_sbm, NOISE, 4)
    run = run_method(small_sbm, labels, "plain", tiny_config(patience=3, train=TrainConfig(epochs=300)), seed=4)
    assert run.result.epochs_run < 300
    assert run.result.best_epoch is not None


def test_unknown_method(small_sbm):
    with pytest.raises(UsageError):
        run_method(small_sbm, small_sbm.clean_labels, "coteaching", tiny_config(), seed=0)


def test_aggregate_uses_population_std():
    runs = [
        RunResult(method="plain", seed=1, test_acc=0.6),
        RunResult(method="plain", seed=2, test_acc=0.8),
        RunResult(method="tss", seed=1, test_acc=0.9),
    ]
    rows = aggregate(runs)
    assert [row.method for row in rows] == ["plain", "tss"]
    assert rows[0].mean == pytest.approx(0.7)
    assert rows[0].std == pytest.approx(0.1)
    assert rows[1].std == 0.0 and rows[1].n == 1


def test_aggregate_separates_cells():
    runs = [
        RunResult(method="tss", seed=1, test_acc=0.5, cell={"lambda0": 0.3}),
        RunResult(method="tss", seed=1, test_acc=0.7, cell={"lambda0": 0.6}),
    ]
    assert len(aggregate(runs)) == 2


def test_run_experiment_writes_artifacts(small_sbm, tmp_path):
    seeds = run_seeds(0, 2)
    report = run_experiment(small_sbm, ["plain", "tss"], tiny_config(), seeds, noise=NOISE, workers=2, artifacts_dir=tmp_path)
    assert [(run.method, run.seed) for run in report.runs] == [
        ("plain", seeds[0]), ("tss", seeds[0]), ("plain", seeds[1]), ("tss", seeds[1]),
    ]
    assert {row.method for row in report.aggregate} == {"plain", "tss"}
    assert set(report.extraction) == {f"tss:{seed}" for seed in seeds}
    run_dir = tmp_path / "runs" / f"tss-{seeds[0]}"
    assert (run_dir / "trace.jsonl").exists()
    assert read_json(run_dir / "trace.summary.json")["epochs_run"] == 6
    params, config = load_checkpoint(run_dir / "model.ckpt")
    assert config["method"] == "tss"
    assert params.hidden == 16
    assert (tmp_path / "runs" / f"plain-{seeds[0]}" / "history.csv").exists()


def test_parallel_and_serial_experiments_agree(small_sbm):
    seeds = run_seeds(1, 2)
    serial = run_experiment(small_sbm, ["tss"], tiny_config(), seeds, noise=NOISE)
    parallel = run_experiment(small_sbm, ["tss"], tiny_config(), seeds, noise=NOISE, workers=2)
    assert [run.test_acc for run in serial.runs] == [run.test_acc for run in parallel.runs]


class TestGrid:
    def test_cell_key_is_order_independent(self):
        assert cell_key({}) == "base"
        assert cell_key({"pacing": "root", "lambda0": 0.3}) == "lambda0=0.3__pacing=root"
        assert cell_key({"lambda0": 0.3, "pacing": "root"}) == cell_key({"pacing": "root", "lambda0": 0.3})

    def test_expand_grid(self):
        cells = expand_grid({"pacing": ["linear", "root"], "lambda0": [0.3, 0.6]})
        assert len(cells) == 4
        assert cells[0] == {"lambda0": 0.3, "pacing": "linear"}

    @pytest.mark.parametrize("grid", [{"learning_rate": [0.1]}, {"lambda0": []}, {"lambda0": 0.3}])
    def test_rejects_bad_grids(self, grid):
        with pytest.raises(UsageError):
            expand_grid(grid)

    def test_apply_cell(self):
        config, noise = apply_cell(tiny_config(), NOISE, {"lambda0": 0.4, "noise_rate": 0.1})
        assert config.lambda0 == 0.4
        assert noise.rate == 0.1
        with pytest.raises(UsageError):
            apply_cell(tiny_config(), NOISE, {"lambda0": 2.0})
        with pytest.raises(UsageError):
            apply_cell(tiny_config(), None, {"noise_rate": 0.1})


def test_sweep_resumes_from_cell_files(small_sbm, tmp_path, monkeypatch):
    grid = {"lambda0": [0.5, 1.0]}
    seeds = [run_seeds(2, 1)[0]]
    first = run_sweep(small_sbm, grid, ["tss"], tiny_config(), seeds, tmp_path, noise=NOISE)
    assert sorted(path.name for path in (tmp_path / "cells").iterdir()) == ["lambda0=0.5.json", "lambda0=1.0.json"]

    def fail(*args, **kwargs):
        raise AssertionError("completed cells must not rerun")

    monkeypatch.setattr("tsslab.services.experiments.run_experiment", fail)
    resumed = run_sweep(small_sbm, grid, ["tss"], tiny_config(), seeds, tmp_path, noise=NOISE)
    assert [run.test_acc for run in resumed.runs] == [run.test_acc for run in first.runs]
    assert [run.cell for run in resumed.runs] == [{"lambda0": 0.5}, {"lambda0": 1.0}]


def test_services_catalog():
    services = TssServices()
    assert "experiments" in services.get_all_services()
    assert "run_sweep" in services.get_service_names("experiments")
    assert services.get_service_category("unknown") == {}
