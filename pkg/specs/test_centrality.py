"""Class-conditional betweenness, shortest-path oracles and rank statistics."""

import itertools

import networkx as nx
import numpy as np
import pytest

from conftest import make_graph, path_edges, random_connected_graph
from tsslab.config import Settings
from tsslab.errors import UndefinedStatisticError, UsageError
from tsslab.services.centrality import (
    betweenness_centrality,
    cbc_scores,
    feature_difficulty,
    neighborhood_difficulty,
    rank_correlation,
    shortest_path_cbc,
)
from tsslab.services.graphs import normalized_adjacency
from tsslab.services.ppr import ppr_dense


def ppr_of(graph, alpha=0.15):
    return ppr_dense(normalized_adjacency(graph, with_self_loops=False), alpha=alpha)


def triple_loop_cbc(pi, labels, nodes, epsilon):
    """Direct sum over ordered pairs; reference for the vectorised path."""
    scores = np.zeros(pi.shape[0])
    n_s = len(nodes)
    for i in nodes:
        total = 0.0
        for u, v in itertools.permutations(nodes, 2):
            if i in (u, v) or labels[u] == labels[v] or pi[u, v] < epsilon:
                continue
            total += pi[u, i] * pi[i, v] / pi[u, v]
        scores[i] = total / (n_s * (n_s - 1))
    return scores


def brute_force_betweenness(graph, labels=None):
    """Enumerate every shortest path with networkx."""
    nx_graph = nx.from_scipy_sparse_array(graph.adjacency)
    n = graph.n
    scores = np.zeros(n)
    for s, t in itertools.permutations(range(n), 2):
        if labels is not None and labels[s] == labels[t]:
            continue
        if not nx.has_path(nx_graph, s, t):
            continue
        paths = list(nx.all_shortest_paths(nx_graph, s, t))
        for path in paths:
            for node in path[1:-1]:
                scores[node] += 1.0 / len(paths)
    return scores / (n * (n - 1))


@pytest.mark.parametrize("seed", range(10))
def test_cbc_matches_triple_loop(seed):
    n = 12 + 3 * seed
    graph = random_connected_graph(n, n // 2, seed=seed)
    ppr = ppr_of(graph)
    nodes = np.arange(0, n, 1 + seed % 2)
    result = cbc_scores(ppr, graph.clean_labels, nodes)
    expected = triple_loop_cbc(ppr.dense(), graph.clean_labels, nodes, 1e-12)
    assert np.max(np.abs(result.scores - expected)) <= 1e-10
    assert not result.sampled
    assert result.pair_count == result.eligible_pairs


def test_cbc_ignores_class_names():
    graph = random_connected_graph(20, 15, seed=2, num_classes=3)
    ppr = ppr_of(graph)
    relabeled = np.array([2, 0, 1])[graph.clean_labels]
    original = cbc_scores(ppr, graph.clean_labels, range(20)).scores
    assert np.array_equal(cbc_scores(ppr, relabeled, range(20)).scores, original)


def test_cbc_outside_node_set_is_zero():
    graph = random_connected_graph(12, 6, seed=1)
    result = cbc_scores(ppr_of(graph), graph.clean_labels, [0, 1, 2, 3, 4])
    assert np.all(result.scores[5:] == 0.0)
    assert list(result.node_set) == [0, 1, 2, 3, 4]


def test_cbc_middle_nodes_beat_endpoints(path4):
    result = cbc_scores(ppr_of(path4), path4.clean_labels, range(4))
    scores = result.scores
    assert scores[1] > scores[0]
    assert scores[2] > scores[3]
    assert scores[0] == pytest.approx(scores[3])
    assert scores[1] == pytest.approx(scores[2])


def test_cbc_single_class_is_zero():
    graph = make_graph(4, path_edges(4), labels=[0, 0, 1, 1])
    result = cbc_scores(ppr_of(graph), np.zeros(4, dtype=np.int64), range(4))
    assert np.all(result.scores == 0.0)
    assert result.pair_count == 0


def test_cbc_epsilon_skips_weak_pairs():
    graph = random_connected_graph(10, 4, seed=2)
    result = cbc_scores(ppr_of(graph), graph.clean_labels, range(10), epsilon=1.0)
    assert result.pair_count == 0
    assert result.skipped_pairs > 0
    assert np.all(result.scores == 0.0)


def test_cbc_rejects_bad_arguments(path4):
    ppr = ppr_of(path4)
    with pytest.raises(UsageError):
        cbc_scores(ppr, path4.clean_labels, [])
    with pytest.raises(UsageError):
        cbc_scores(ppr, path4.clean_labels, range(4), epsilon=0.0)


def test_cbc_parallel_blocks_match_serial(monkeypatch):
    import tsslab.services.centrality as centrality

    monkeypatch.setattr(centrality, "BLOCK_SIZE", 4)
    graph = random_connected_graph(20, 10, seed=9)
    ppr = ppr_of(graph)
    serial = cbc_scores(ppr, graph.clean_labels, range(20))
    parallel = cbc_scores(ppr, graph.clean_labels, range(20), parallelism=3)
    assert np.allclose(serial.scores, parallel.scores, atol=1e-15)


def test_sampled_cbc_is_seeded_and_close():
    graph = random_connected_graph(30, 30, seed=6)
    ppr = ppr_of(graph)
    exact = cbc_scores(ppr, graph.clean_labels, range(30))
    budget = exact.eligible_pairs - 1
    first = cbc_scores(ppr, graph.clean_labels, range(30), pair_budget=budget, seed=5)
    second = cbc_scores(ppr, graph.clean_labels, range(30), pair_budget=budget, seed=5)
    assert first.sampled
    assert first.pair_count == budget
    assert np.array_equal(first.scores, second.scores)
    assert first.scores.sum() == pytest.approx(exact.scores.sum(), rel=0.05)
    assert rank_correlation(first.scores, exact.scores) > 0.9


def test_betweenness_star_centre():
    graph = make_graph(5, [(0, k) for k in range(1, 5)])
    scores = betweenness_centrality(graph)
    assert scores[0] == pytest.approx(3 / 5)
    assert np.all(scores[1:] == 0.0)


def test_betweenness_matches_networkx():
    graph = random_connected_graph(15, 10, seed=3)
    ours = betweenness_centrality(graph)
    theirs = nx.betweenness_centrality(nx.from_scipy_sparse_array(graph.adjacency), normalized=False)
    n = graph.n
    assert np.allclose(ours * n * (n - 1) / 2, [theirs[i] for i in range(n)])


@pytest.mark.parametrize("seed", range(10))
def test_betweenness_matches_path_enumeration(seed):
    n = 8 + 2 * seed
    graph = random_connected_graph(n, n // 2, seed=seed)
    assert np.allclose(betweenness_centrality(graph), brute_force_betweenness(graph), rtol=0, atol=1e-12)


def test_betweenness_on_path_and_complete_graph():
    n = 6
    expected = [2 * k * (n - 1 - k) / (n * (n - 1)) for k in range(n)]
    assert np.allclose(betweenness_centrality(make_graph(n, path_edges(n))), expected)
    complete = make_graph(5, list(itertools.combinations(range(5), 2)))
    assert np.all(betweenness_centrality(complete) == 0.0)


def test_shortest_path_cbc_on_path():
    graph = make_graph(3, path_edges(3), labels=[0, 0, 1])
    assert np.allclose(shortest_path_cbc(graph, graph.clean_labels), [0.0, 1 / 3, 0.0])
    same_ends = make_graph(3, path_edges(3), labels=[0, 1, 0])
    assert np.all(shortest_path_cbc(same_ends, same_ends.clean_labels) == 0.0)


@pytest.mark.parametrize("seed", range(10))
def test_shortest_path_cbc_matches_path_enumeration(seed):
    n = 8 + 2 * seed
    graph = random_connected_graph(n, n // 2, seed=100 + seed)
    expected = brute_force_betweenness(graph, graph.clean_labels)
    assert np.allclose(shortest_path_cbc(graph, graph.clean_labels), expected, rtol=0, atol=1e-12)


def test_oracle_refuses_large_graphs(monkeypatch):
    monkeypatch.setattr("tsslab.services.centrality.get_settings", lambda: Settings(oracle_threshold=3))
    with pytest.raises(UsageError):
        betweenness_centrality(make_graph(4, path_edges(4)))


def test_rank_correlation():
    assert rank_correlation(np.array([1.0, 2.0, 3.0]), np.array([10.0, 20.0, 30.0])) == pytest.approx(1.0)
    assert rank_correlation(np.array([1.0, 2.0, 3.0, 4.0]), np.array([4.0, 3.0, 2.0, 1.0])) == pytest.approx(-1.0)
    with pytest.raises(UndefinedStatisticError):
        rank_correlation(np.array([1.0, 1.0, 1.0]), np.array([1.0, 2.0, 3.0]))
    with pytest.raises(UsageError):
        rank_correlation(np.array([1.0, 2.0]), np.array([1.0, 2.0]))


def test_neighborhood_difficulty(path4):
    scores = neighborhood_difficulty(path4, path4.clean_labels, [0, 1, 2])
    assert np.allclose(scores, [0.0, 0.5, 0.5, 0.0])


def test_feature_difficulty_is_distance_to_class_mean():
    features = np.array([[0.0], [2.0], [10.0], [10.0]])
    graph = make_graph(4, path_edges(4), labels=[0, 0, 1, 1], features=features)
    assert np.allclose(feature_difficulty(graph, graph.clean_labels, range(4)), [1.0, 1.0, 0.0, 0.0])
