"""Shared fixtures for the tsslab test suite."""

import numpy as np
import pytest

from tsslab.models.graph import Graph
from tsslab.services.graphs import adjacency_from_edges, generate_sbm


def make_graph(n, edges, labels=None, num_classes=None, features=None, train=None, val=None, test=None, noisy=None):
    """Small graph builder; every node is a training node unless masks are given."""
    adjacency, _ = adjacency_from_edges(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2))
    if labels is None:
        labels = np.zeros(n, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if num_classes is None:
        num_classes = int(labels.max()) + 1 if labels.size else 1
    if features is None:
        features = np.eye(n)
    train_mask = np.ones(n, dtype=bool) if train is None else np.asarray(train, dtype=bool)
    val_mask = np.zeros(n, dtype=bool) if val is None else np.asarray(val, dtype=bool)
    test_mask = np.zeros(n, dtype=bool) if test is None else np.asarray(test, dtype=bool)
    return Graph(
        n=n,
        adjacency=adjacency,
        features=features,
        num_classes=num_classes,
        train_mask=train_mask,
        val_mask=val_mask,
        test_mask=test_mask,
        clean_labels=labels,
        noisy_labels=noisy,
    )


def path_edges(n):
    return [(i, i + 1) for i in range(n - 1)]


def random_connected_graph(n, extra_edges, seed, num_classes=3):
    """Random path-backbone graph with extra random chords and random labels."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    edges = [(int(order[i]), int(order[i + 1])) for i in range(n - 1)]
    for _ in range(extra_edges):
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.append((int(u), int(v)))
    labels = rng.integers(0, num_classes, size=n)
    labels[:num_classes] = np.arange(num_classes)
    features = rng.standard_normal((n, 4))
    return make_graph(n, edges, labels=labels, num_classes=num_classes, features=features)


@pytest.fixture
def path4():
    """P4 a-b-c-d with labels (0, 0, 1, 1)."""
    return make_graph(4, path_edges(4), labels=[0, 0, 1, 1])


@pytest.fixture
def small_sbm():
    """Well separated 3-class SBM small enough for fast training."""
    return generate_sbm(
        n=150, num_classes=3, p_in=0.12, p_out=0.005, feature_dim=8, feature_shift=3.0, seed=3,
    )


@pytest.fixture
def graph_dir(tmp_path, small_sbm):
    from tsslab.io.graph_files import save_graph

    out = tmp_path / "graph"
    save_graph(small_sbm, out)
    return out
