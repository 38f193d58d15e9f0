"""Pacing, confident extraction and the topological curriculum loop."""

import math

import numpy as np
import pytest

from tsslab.errors import GraphValidationError, UndefinedStatisticError, UsageError
from tsslab.models.trace import TrainTrace
from tsslab.schemas.noise import NoiseSpec
from tsslab.schemas.training import EpochRecord, TrainConfig, TssConfig
from tsslab.services.centrality import feature_difficulty
from tsslab.services.curriculum import (
    cbc_fscore_correlation,
    check_trace,
    confident_subset,
    extract_confident,
    extraction_fscore,
    pacing,
    pacing_schedule,
    run_tss,
    sort_by_cbc,
    split_noisy_validation,
    topological_cbc,
)
from tsslab.services.gcn import init_params, train_plain
from tsslab.services.noise import corrupt_graph_labels


def quick_config(**overrides):
    base = dict(T=25, pretrain_epochs=40, lambda0=0.5, patience=None, train=TrainConfig(epochs=40))
    base.update(overrides)
    return TssConfig(**base)


@pytest.fixture
def noisy_sbm(small_sbm):
    noisy = corrupt_graph_labels(small_sbm, NoiseSpec(kind="symmetric", rate=0.3, seed=5))
    return small_sbm.with_noisy_labels(noisy)


class TestPacing:
    def test_linear_step(self):
        assert pacing("linear", 0.5, 0.5, 1, 10) == pytest.approx(0.55)

    def test_root_step(self):
        assert pacing("root", 0.5, 0.5, 1, 10) == pytest.approx(math.sqrt(0.325))

    def test_geometric_closed_form(self):
        assert pacing("geometric", 0.25, 0.25, 2, 4) == pytest.approx(0.5)

    @pytest.mark.parametrize("kind", ["linear", "root", "geometric"])
    def test_last_epoch_is_one(self, kind):
        assert pacing(kind, 0.3, 0.3, 7, 7) == 1.0

    @pytest.mark.parametrize("kind", ["linear", "root", "geometric"])
    def test_schedule_is_monotone_and_clamped(self, kind):
        values = pacing_schedule(kind, 0.2, 50)
        assert len(values) == 50
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert min(values) >= 0.2
        assert values[-1] == 1.0

    def test_full_start_stays_at_one(self):
        assert pacing_schedule("linear", 1.0, 5) == [1.0] * 5

    @pytest.mark.parametrize("t,T,lambda0", [(0, 5, 0.5), (6, 5, 0.5), (1, 5, 0.0), (1, 5, 1.5)])
    def test_rejects_out_of_range(self, t, T, lambda0):
        with pytest.raises(UsageError):
            pacing("linear", 0.5, lambda0, t, T)


def test_sort_breaks_ties_by_id():
    scores = np.array([0.3, 0.1, 0.1, 0.0, 0.5])
    assert list(sort_by_cbc(scores, [4, 2, 1, 0])) == [1, 2, 0, 4]


def test_extract_confident_keeps_pool_order():
    predictions = np.array([0, 1, 1, 0])
    noisy = np.array([0, 0, 1, 0])
    assert list(extract_confident(predictions, noisy, [3, 2, 1, 0])) == [3, 2, 0]


def test_confident_subset_needs_a_pool(noisy_sbm):
    params = init_params(noisy_sbm.feature_dim, 4, noisy_sbm.num_classes, seed=0)
    with pytest.raises(UsageError):
        confident_subset(params, noisy_sbm, noisy_sbm.noisy_labels, [])


class TestExtractionScore:
    def test_hand_example(self):
        score = extraction_fscore([0, 1], np.array([True, False, True, True]), [0, 1])
        assert score.precision == 0.5
        assert score.recall == 1.0
        assert score.fscore == pytest.approx(2 / 3)

    def test_empty_extraction_is_undefined(self):
        score = extraction_fscore([], np.array([True, True]))
        assert score.precision is None
        assert score.fscore is None
        assert score.recall == 0.0

    def test_all_wrong_scores_zero(self):
        score = extraction_fscore([1], np.array([True, False]), [0, 1])
        assert score.fscore == 0.0


def test_noisy_validation_split():
    train_ids = np.arange(0, 40, 2)
    fit, val = split_noisy_validation(train_ids, 0.1, seed=3)
    assert val.size == 2 and fit.size == 18
    assert sorted(np.concatenate([fit, val]).tolist()) == train_ids.tolist()
    assert list(fit) == sorted(fit)
    again_fit, again_val = split_noisy_validation(train_ids, 0.1, seed=3)
    assert np.array_equal(val, again_val) and np.array_equal(fit, again_fit)
    with pytest.raises(UsageError):
        split_noisy_validation(np.array([1]), 0.9, seed=0)


def test_topological_cbc_covers_requested_nodes(noisy_sbm):
    ids = noisy_sbm.train_ids
    cbc = topological_cbc(noisy_sbm, noisy_sbm.noisy_labels, ids)
    assert list(cbc.node_set) == sorted(ids.tolist())
    outside = np.setdiff1d(np.arange(noisy_sbm.n), ids)
    assert np.all(cbc.scores[outside] == 0.0)
    assert np.any(cbc.scores[ids] > 0.0)


class TestRunTss:
    def test_trace_satisfies_invariants(self, noisy_sbm):
        params, trace = run_tss(noisy_sbm, noisy_sbm.noisy_labels, quick_config())
        assert len(trace.records) == 25
        report = check_trace(trace, noisy_sbm.train_mask)
        assert report["is_valid"], report["details"]
        assert trace.records[-1].lambda_t == 1.0
        assert trace.records[0].pool_size == math.floor(pacing("linear", 0.5, 0.5, 1, 25) * trace.fit_ids.size)
        assert trace.params is params
        assert trace.noisy_val_ids.size == round(0.1 * noisy_sbm.train_ids.size)
        assert not set(trace.noisy_val_ids.tolist()) & set(trace.fit_ids.tolist())
        assert all(record.extraction is not None for record in trace.records)

    def test_is_deterministic(self, noisy_sbm):
        config = quick_config(T=10)
        first_params, first = run_tss(noisy_sbm, noisy_sbm.noisy_labels, config)
        second_params, second = run_tss(noisy_sbm, noisy_sbm.noisy_labels, config)
        assert [r.confident_ids for r in first.records] == [r.confident_ids for r in second.records]
        assert np.array_equal(first_params.W1, second_params.W1)
        assert first.best_epoch == second.best_epoch

    def test_clean_labels_extract_only_clean_nodes(self, small_sbm):
        _, trace = run_tss(small_sbm, small_sbm.clean_labels, quick_config(T=5))
        for record in trace.records:
            if record.confident_size:
                assert record.extraction.precision == 1.0

    def test_vanilla_schedule_uses_whole_pool(self, noisy_sbm):
        _, trace = run_tss(noisy_sbm, noisy_sbm.noisy_labels, quick_config(T=6, schedule="vanilla"))
        sizes = {record.pool_size for record in trace.records}
        assert sizes == {trace.fit_ids.size}
        assert all(record.lambda_t == 1.0 for record in trace.records)
        assert len({tuple(record.confident_ids) for record in trace.records}) == 1
        assert check_trace(trace, noisy_sbm.train_mask)["is_valid"]

    def test_refresh_keeps_invariants(self, noisy_sbm):
        _, trace = run_tss(noisy_sbm, noisy_sbm.noisy_labels, quick_config(T=12, refresh_every=3))
        assert check_trace(trace, noisy_sbm.train_mask)["is_valid"]

    def test_feature_difficulty_orders_by_distance(self, noisy_sbm):
        _, trace = run_tss(noisy_sbm, noisy_sbm.noisy_labels, quick_config(T=4, difficulty="feature"))
        expected = sort_by_cbc(
            feature_difficulty(noisy_sbm, noisy_sbm.noisy_labels, trace.fit_ids), trace.fit_ids,
        )
        assert np.array_equal(trace.sorted_order, expected)

    def test_neighborhood_difficulty_runs(self, noisy_sbm):
        _, trace = run_tss(noisy_sbm, noisy_sbm.noisy_labels, quick_config(T=4, difficulty="neighborhood"))
        assert check_trace(trace, noisy_sbm.train_mask)["is_valid"]

    def test_early_stop_only_after_full_pace(self, noisy_sbm):
        config = quick_config(T=200, lambda0=1.0, patience=2)
        _, trace = run_tss(noisy_sbm, noisy_sbm.noisy_labels, config)
        assert len(trace.records) < 200
        assert trace.best_epoch is not None
        assert trace.best_val_acc == max(r.val_acc for r in trace.records if not r.skipped)

    def test_empty_confident_sets_are_skipped(self, noisy_sbm, monkeypatch):
        monkeypatch.setattr(
            "tsslab.services.curriculum.extract_confident",
            lambda predictions, noisy, pool: np.zeros(0, dtype=np.int64),
        )
        params, trace = run_tss(noisy_sbm, noisy_sbm.noisy_labels, quick_config(T=3))
        assert all(record.skipped and record.loss is None for record in trace.records)
        assert trace.best_epoch is None
        reference = init_params(noisy_sbm.feature_dim, 16, noisy_sbm.num_classes, quick_config().train.seed)
        assert np.array_equal(params.W1, reference.W1)

    def test_rejects_wrong_label_length(self, noisy_sbm):
        with pytest.raises(GraphValidationError):
            run_tss(noisy_sbm, np.zeros(3, dtype=np.int64), quick_config())


def test_check_trace_flags_decreasing_pace():
    trace = TrainTrace(sorted_order=np.arange(10), fit_ids=np.arange(10), noisy_val_ids=np.array([], dtype=np.int64))
    trace.append(EpochRecord(t=1, lambda_t=0.8, pool_size=8, confident_size=0))
    trace.append(EpochRecord(t=2, lambda_t=0.6, pool_size=6, confident_size=0))
    report = check_trace(trace, np.ones(10, dtype=bool))
    assert not report["is_valid"]
    assert not report["details"]["lambda_monotone"]["passed"]
    assert not report["details"]["pool_monotone"]["passed"]
    assert not report["details"]["lambda_reaches_one"]["passed"]
    assert report["details"]["pool_size_matches"]["passed"]


def test_check_trace_flags_confident_node_outside_pool():
    trace = TrainTrace(sorted_order=np.arange(4), fit_ids=np.arange(4), noisy_val_ids=np.array([], dtype=np.int64))
    trace.append(EpochRecord(t=1, lambda_t=1.0, pool_size=2, confident_size=1, confident_ids=[3]))
    report = check_trace(trace, np.ones(4, dtype=bool))
    assert not report["details"]["confident_in_pool"]["passed"]
    assert not report["details"]["pool_size_matches"]["passed"]


class TestCorrelation:
    def test_report_shape(self, noisy_sbm):
        extractor, _ = train_plain(noisy_sbm, noisy_sbm.noisy_labels, noisy_sbm.train_mask, TrainConfig(epochs=60))
        report = cbc_fscore_correlation(noisy_sbm, noisy_sbm.noisy_labels, extractor, num_subsets=20, subset_size=15, seed=2)
        assert len(report.rows) == 20
        assert report.subset_size == 15
        assert -1.0 <= report.pearson_r <= 1.0
        assert 0.0 <= report.p_value <= 1.0

    def test_needs_clean_labels_and_enough_subsets(self, noisy_sbm):
        params = init_params(noisy_sbm.feature_dim, 4, noisy_sbm.num_classes, seed=0)
        with pytest.raises(UsageError):
            cbc_fscore_correlation(noisy_sbm, noisy_sbm.noisy_labels, params, num_subsets=2)
        with pytest.raises(UsageError):
            cbc_fscore_correlation(noisy_sbm, noisy_sbm.noisy_labels, params, subset_size=10_000)

    def test_identical_subsets_are_undefined(self, small_sbm):
        params = init_params(small_sbm.feature_dim, 4, small_sbm.num_classes, seed=0)
        with pytest.raises(UndefinedStatisticError):
            cbc_fscore_correlation(small_sbm, small_sbm.clean_labels, params, num_subsets=5, subset_size=small_sbm.train_ids.size)
