"""Class-conditional betweenness, shortest-path oracles and rank statistics."""

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
import scipy.stats

from ..config import get_settings
from ..errors import UndefinedStatisticError, UsageError
from ..log import get_logger
from ..models.centrality import CbcScores
from ..models.graph import Graph
from ..models.ppr import PprMatrix
from ..validators import ensure_labels

logger = get_logger(__name__)

DEFAULT_EPSILON = 1e-12
DEFAULT_PAIR_LIMIT = 2_000_000
BLOCK_SIZE = 256
PAIR_CHUNK = 4096


def _exact_block(P: np.ndarray, W: np.ndarray, block: np.ndarray) -> np.ndarray:
    # sum_{u,v} P[u,i] W[u,v] P[i,v] for i in block, minus the u == i and v == i terms
    totals = ((P[:, block].T @ W) * P[block, :]).sum(axis=1)
    diag = P[block, block]
    totals -= diag * (W[block, :] * P[block, :]).sum(axis=1)
    totals -= diag * (W[:, block] * P[:, block]).sum(axis=0)
    return totals


def _sampled_scores(P: np.ndarray, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    n_s = P.shape[0]
    totals = np.zeros(n_s)
    for start in range(0, len(U), PAIR_CHUNK):
        u = U[start:start + PAIR_CHUNK]
        v = V[start:start + PAIR_CHUNK]
        weight = 1.0 / P[u, v]
        contrib = P[u, :] * weight[:, None] * P[:, v].T
        rows = np.arange(len(u))
        contrib[rows, u] = 0.0
        contrib[rows, v] = 0.0
        totals += contrib.sum(axis=0)
    return totals


def cbc_scores(
    ppr: PprMatrix,
    noisy_labels: np.ndarray,
    node_set: Sequence[int],
    epsilon: float = DEFAULT_EPSILON,
    pair_budget: Optional[int] = None,
    seed: int = 0,
    parallelism: int = 1,
) -> CbcScores:
    """
    Class-conditional betweenness centrality over ``node_set``.

    For each i in the node set, sums pi[u,i] pi[i,v] / pi[u,v] over ordered pairs
    (u, v) of other node-set members with different labels, skipping pairs with
    pi[u,v] < epsilon, and divides by n_s (n_s - 1). When the eligible pair count
    exceeds ``pair_budget`` a uniform subsample is used and rescaled.
    """
    if epsilon <= 0:
        raise UsageError("epsilon must be positive")
    nodes = np.unique(np.asarray(node_set, dtype=np.int64))
    if nodes.size == 0:
        raise UsageError("node_set must not be empty")
    labels = np.asarray(noisy_labels, dtype=np.int64)
    n = ppr.n
    scores = np.zeros(n)
    n_s = nodes.size

    node_labels = labels[nodes]
    if np.unique(node_labels).size < 2:
        logger.warning("cbc_single_class_node_set", size=int(n_s))
        return CbcScores(scores=scores, node_set=nodes, pair_count=0, skipped_pairs=0, epsilon=epsilon, eligible_pairs=0)

    P = ppr.submatrix(nodes)
    differs = node_labels[:, None] != node_labels[None, :]
    eligible = differs & (P >= epsilon)
    skipped = int(np.count_nonzero(differs & ~eligible))
    total = int(np.count_nonzero(eligible))
    limit = DEFAULT_PAIR_LIMIT if pair_budget is None else int(pair_budget)
    normaliser = float(n_s * (n_s - 1))

    if total == 0:
        return CbcScores(scores=scores, node_set=nodes, pair_count=0, skipped_pairs=skipped, epsilon=epsilon, eligible_pairs=0)

    if total <= limit:
        W = np.zeros_like(P)
        W[eligible] = 1.0 / P[eligible]
        blocks = [np.arange(start, min(start + BLOCK_SIZE, n_s)) for start in range(0, n_s, BLOCK_SIZE)]
        if parallelism > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                parts = list(pool.map(lambda block: _exact_block(P, W, block), blocks))
        else:
            parts = [_exact_block(P, W, block) for block in blocks]
        totals = np.concatenate(parts)
        pair_count, sampled = total, False
    else:
        rng = np.random.default_rng(seed)
        flat = np.flatnonzero(eligible.ravel())
        chosen = np.sort(rng.choice(flat, size=limit, replace=False))
        U, V = np.divmod(chosen, n_s)
        totals = _sampled_scores(P, U, V) * (total / limit)
        pair_count, sampled = limit, True

    scores[nodes] = np.maximum(totals, 0.0) / normaliser
    logger.info("cbc_computed", nodes=int(n_s), pairs=pair_count, eligible=total, skipped=skipped, sampled=sampled)
    return CbcScores(
        scores=scores,
        node_set=nodes,
        pair_count=pair_count,
        skipped_pairs=skipped,
        epsilon=epsilon,
        eligible_pairs=total,
        sampled=sampled,
    )


def _check_oracle_size(graph: Graph) -> None:
    limit = get_settings().oracle_threshold
    if graph.n > limit:
        raise UsageError(f"shortest-path oracles are limited to n <= {limit}, got n={graph.n}")


def _brandes(graph: Graph, labels: Optional[np.ndarray]) -> np.ndarray:
    n = graph.n
    indptr, indices = graph.adjacency.indptr, graph.adjacency.indices
    centrality = np.zeros(n)
    for source in range(n):
        stack = []
        predecessors = [[] for _ in range(n)]
        sigma = np.zeros(n)
        sigma[source] = 1.0
        dist = np.full(n, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in indices[indptr[v]:indptr[v + 1]]:
                if dist[w] < 0:
                    queue.append(w)
                    dist[w] = dist[v] + 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    predecessors[w].append(v)

        delta = np.zeros(n)
        while stack:
            w = stack.pop()
            # a target counts only when its label differs from the source's
            counted = 1.0 if labels is None or labels[w] != labels[source] else 0.0
            for v in predecessors[w]:
                delta[v] += sigma[v] / sigma[w] * (counted + delta[w])
            if w != source:
                centrality[w] += delta[w]
    if n > 1:
        centrality /= n * (n - 1)
    return centrality


def betweenness_centrality(graph: Graph) -> np.ndarray:
    """Shortest-path betweenness over ordered pairs, normalised by n(n-1)."""
    _check_oracle_size(graph)
    return _brandes(graph, None)


def shortest_path_cbc(graph: Graph, labels: np.ndarray) -> np.ndarray:
    """Shortest-path betweenness restricted to pairs with different labels."""
    _check_oracle_size(graph)
    labels = ensure_labels(labels, graph.n, graph.num_classes)
    return _brandes(graph, labels)


def rank_correlation(scores_a: np.ndarray, scores_b: np.ndarray) -> float:
    """Spearman rank correlation with average ranks for ties."""
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise UsageError("score vectors must be one-dimensional and of equal length")
    if a.size < 3:
        raise UsageError("rank correlation needs at least 3 scores")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise UndefinedStatisticError("rank correlation is undefined for a constant vector", "spearman")
    rho, _ = scipy.stats.spearmanr(a, b)
    return float(rho)


def feature_difficulty(graph: Graph, labels: np.ndarray, node_set: Sequence[int]) -> np.ndarray:
    """
    Distance of each node's features to the mean of its labelled class.

    Class means are taken over ``node_set``; nodes outside it score 0.
    """
    nodes = np.unique(np.asarray(node_set, dtype=np.int64))
    labels = np.asarray(labels, dtype=np.int64)
    scores = np.zeros(graph.n)
    features = graph.features[nodes]
    node_labels = labels[nodes]
    for label in np.unique(node_labels):
        members = node_labels == label
        centre = features[members].mean(axis=0)
        scores[nodes[members]] = np.linalg.norm(features[members] - centre, axis=1)
    return scores


def neighborhood_difficulty(graph: Graph, labels: np.ndarray, node_set: Sequence[int]) -> np.ndarray:
    """Share of each node's neighbours whose label differs from its own; isolated nodes score 0."""
    nodes = np.unique(np.asarray(node_set, dtype=np.int64))
    labels = np.asarray(labels, dtype=np.int64)
    adjacency = graph.adjacency.tocoo()
    disagree = (labels[adjacency.row] != labels[adjacency.col]).astype(np.float64)
    counts = np.bincount(adjacency.row, weights=disagree, minlength=graph.n)
    degrees = graph.degrees.astype(np.float64)
    share = np.divide(counts, degrees, out=np.zeros(graph.n), where=degrees > 0)
    scores = np.zeros(graph.n)
    scores[nodes] = share[nodes]
    return scores
