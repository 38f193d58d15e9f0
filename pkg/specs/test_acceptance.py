"""
Statistical acceptance runs over many seeds.

Deselected by default; run with ``pytest -m slow``.
"""

import numpy as np
import pytest

from conftest import make_graph, random_connected_graph
from tsslab.models.graph import BoundaryTag
from tsslab.schemas.noise import NoiseSpec
from tsslab.schemas.training import TrainConfig, TssConfig
from tsslab.services.centrality import cbc_scores, rank_correlation, shortest_path_cbc
from tsslab.services.curriculum import check_trace, pacing_schedule, run_tss, topological_cbc
from tsslab.services.experiments import correlation_study, run_experiment, run_seeds
from tsslab.services.graphs import classify_boundary, generate_sbm, normalized_adjacency
from tsslab.services.noise import apply_class_noise, corrupt_graph_labels, noise_audit, transition_matrix
from tsslab.services.ppr import ppr_dense, ppr_matrix

pytestmark = pytest.mark.slow

SEEDS = range(10)


def desk_sbm(seed):
    return generate_sbm(600, 3, 0.05, 0.005, 16, 1.0, seed=seed)


def noisy(graph, rate, seed):
    return corrupt_graph_labels(graph, NoiseSpec(kind="symmetric", rate=rate, seed=seed))


def test_iterative_ppr_matches_dense_on_random_graphs():
    for index in range(20):
        graph = random_connected_graph(40 + 8 * index, 30, seed=index)
        norm = normalized_adjacency(graph, with_self_loops=False)
        for alpha in (0.05, 0.15, 0.3):
            dense = ppr_dense(norm, alpha).dense()
            iterative = ppr_matrix(norm, alpha=alpha, tol=1e-11, method="iterative")
            assert np.abs(iterative.dense() - dense).max() <= 1e-8
            pi = iterative.dense()
            assert np.abs(pi - pi.T).max() <= 2 * iterative.residual_bound + 1e-12


def test_noise_fidelity_at_scale():
    labels = np.random.default_rng(0).integers(0, 4, size=100_000)
    for kind, rate in (("symmetric", 0.5), ("pairflip", 0.3)):
        matrix = transition_matrix(kind, rate, 4)
        audit = noise_audit(labels, apply_class_noise(labels, matrix, seed=1), 4)
        assert np.abs(np.array(audit.confusion) - matrix.matrix).max() <= 0.02


def test_pacing_invariants_over_random_configs():
    rng = np.random.default_rng(0)
    for _ in range(100):
        kind = rng.choice(["linear", "root", "geometric"])
        lambda0 = float(rng.uniform(0.01, 1.0))
        values = pacing_schedule(kind, lambda0, int(rng.integers(1, 300)))
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert values[-1] == 1.0


def test_cbc_ranking_survives_noise():
    rhos = []
    for seed in SEEDS:
        graph = desk_sbm(seed)
        ids = graph.train_ids
        clean = topological_cbc(graph, graph.clean_labels, ids).subset(ids)
        corrupted = topological_cbc(graph, noisy(graph, 0.4, seed), ids).subset(ids)
        rhos.append(rank_correlation(clean, corrupted))
    assert np.mean(rhos) > 0.7


def test_near_boundary_nodes_score_higher():
    wins = 0
    for seed in SEEDS:
        graph = desk_sbm(seed)
        ids = graph.train_ids
        scores = topological_cbc(graph, noisy(graph, 0.4, seed), ids).subset(ids)
        near = np.array([tag == BoundaryTag.NEAR for tag in classify_boundary(graph)])[ids]
        wins += scores[near].mean() > scores[~near].mean()
    assert wins >= 9


def test_random_walk_and_shortest_path_cbc_agree_on_trees():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        edges = [(int(rng.integers(0, v)), v) for v in range(1, 80)]
        labels = (np.arange(80) * 3 // 80).astype(np.int64)
        graph = make_graph(80, edges, labels=labels)
        walk = topological_cbc(graph, labels, np.arange(80)).scores
        path = shortest_path_cbc(graph, labels)
        assert rank_correlation(walk, path) > 0.5


def test_subsampled_cbc_is_unbiased():
    graph = random_connected_graph(100, 400, seed=1)
    ppr = ppr_dense(normalized_adjacency(graph, with_self_loops=False), 0.15)
    exact = cbc_scores(ppr, graph.clean_labels, range(100))
    budget = exact.eligible_pairs // 10
    estimates = np.mean(
        [cbc_scores(ppr, graph.clean_labels, range(100), pair_budget=budget, seed=s).scores for s in range(100)], axis=0,
    )
    relative = np.abs(estimates - exact.scores) / exact.scores
    assert relative.max() <= 0.05


def test_curriculum_traces_hold_invariants():
    graph = desk_sbm(0)
    labels = noisy(graph, 0.3, 0)
    for pacing in ("linear", "root", "geometric"):
        config = TssConfig(T=60, pretrain_epochs=60, pacing=pacing, lambda0=0.3, patience=None)
        _, trace = run_tss(graph, labels, config)
        assert check_trace(trace, graph.train_mask)["is_valid"]


def test_cbc_correlates_negatively_with_extraction_quality():
    values = []
    for seed in SEEDS:
        graph = desk_sbm(seed)
        report = correlation_study(graph, noisy(graph, 0.3, seed), TssConfig(pretrain_epochs=200), 50, seed)
        values.append(report.pearson_r)
    assert np.mean(values) <= -0.3


def test_curriculum_beats_plain_training_under_noise():
    graph = desk_sbm(0)
    config = TssConfig(T=300, pretrain_epochs=200, train=TrainConfig(epochs=300))
    report = run_experiment(graph, ["plain", "tss"], config, run_seeds(0, 10),
                            noise=NoiseSpec(kind="symmetric", rate=0.3), workers=4)
    means = {row.method: row.mean for row in report.aggregate}
    assert means["tss"] - means["plain"] >= 0.01

    clean = run_experiment(graph, ["plain", "tss"], config, run_seeds(0, 10), workers=4)
    means = {row.method: row.mean for row in clean.aggregate}
    assert abs(means["tss"] - means["plain"]) <= 0.01
