"""Graph construction, synthetic generation and structural diagnostics."""

from typing import List, Optional, Tuple

import networkx as nx
import numpy as np
import scipy.sparse as sp

from ..errors import GraphValidationError, SaturationError, UndefinedStatisticError, UsageError
from ..log import get_logger
from ..models.graph import BoundaryTag, Graph, NormalizedAdjacency
from ..schemas.experiments import SbmConfig
from ..validators import ensure_labels

logger = get_logger(__name__)


def adjacency_from_edges(n: int, edges: np.ndarray) -> Tuple[sp.csr_matrix, int]:
    """
    Build a binary symmetric CSR adjacency from (u, v) pairs.

    Reversed and duplicate pairs collapse to one undirected edge.

    Returns:
        Adjacency and the number of self-loops dropped
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    loops = edges[:, 0] == edges[:, 1]
    dropped = int(loops.sum())
    edges = edges[~loops]
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adjacency = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    adjacency.sum_duplicates()
    adjacency.data[:] = 1.0
    adjacency.sort_indices()
    return adjacency, dropped


def masks_from_splits(splits: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split codes (0=train, 1=val, 2=test, 3=none) to boolean masks."""
    splits = np.asarray(splits)
    return splits == 0, splits == 1, splits == 2


def splits_from_masks(graph: Graph) -> np.ndarray:
    splits = np.full(graph.n, 3, dtype=np.int64)
    splits[graph.train_mask] = 0
    splits[graph.val_mask] = 1
    splits[graph.test_mask] = 2
    return splits


def normalized_adjacency(graph: Graph, with_self_loops: bool) -> NormalizedAdjacency:
    """
    D^{-1/2} (A + sI) D^{-1/2}, s = 1 if ``with_self_loops`` else 0.

    Degree-zero nodes get a zero row (s=0) or a 1 on the diagonal (s=1).
    """
    adjacency = graph.adjacency
    if with_self_loops:
        adjacency = adjacency + sp.eye(graph.n, format="csr")
    degrees = np.asarray(adjacency.sum(axis=1)).ravel()
    inv_sqrt = np.zeros_like(degrees)
    positive = degrees > 0
    inv_sqrt[positive] = 1.0 / np.sqrt(degrees[positive])
    scale = sp.diags(inv_sqrt)
    matrix = sp.csr_matrix(scale @ adjacency @ scale)
    matrix.sort_indices()
    return NormalizedAdjacency(matrix=matrix, self_loops=with_self_loops)


def _class_means(num_classes: int, feature_dim: int, shift: float, rng: np.random.Generator) -> np.ndarray:
    # pairwise distance between means equals ``shift``
    if feature_dim >= num_classes:
        directions = np.eye(num_classes, feature_dim)
    else:
        directions = rng.standard_normal((num_classes, feature_dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * (shift / np.sqrt(2.0))


def generate_sbm(
    n: int,
    num_classes: int,
    p_in: float,
    p_out: float,
    feature_dim: int,
    feature_shift: float,
    seed: int,
    train_fraction: float = 0.6,
    val_fraction: float = 0.2,
) -> Graph:
    """
    Balanced stochastic block model with Gaussian class-conditional features.

    Nodes are ordered by block, so node i has class i // (n / num_classes).
    Deterministic given ``seed``.
    """
    try:
        config = SbmConfig(
            n=n,
            num_classes=num_classes,
            p_in=p_in,
            p_out=p_out,
            feature_dim=feature_dim,
            feature_shift=feature_shift,
            seed=seed,
            train_fraction=train_fraction,
            val_fraction=val_fraction,
        )
    except ValueError as exc:
        raise UsageError(f"invalid SBM parameters: {exc}") from exc
    return generate_sbm_from_config(config)


def generate_sbm_from_config(config: SbmConfig) -> Graph:
    """Generate an SBM graph from a validated SbmConfig."""
    block = config.n // config.num_classes
    sizes = [block] * config.num_classes
    probabilities = np.full((config.num_classes, config.num_classes), config.p_out)
    np.fill_diagonal(probabilities, config.p_in)
    nx_graph = nx.stochastic_block_model(sizes, probabilities.tolist(), seed=config.seed)
    edges = np.array(sorted(nx_graph.edges()), dtype=np.int64).reshape(-1, 2)
    adjacency, _ = adjacency_from_edges(config.n, edges)

    rng = np.random.default_rng(config.seed)
    labels = np.repeat(np.arange(config.num_classes), block)
    means = _class_means(config.num_classes, config.feature_dim, config.feature_shift, rng)
    features = means[labels] + rng.standard_normal((config.n, config.feature_dim))

    order = rng.permutation(config.n)
    n_train = int(round(config.train_fraction * config.n))
    n_val = int(round(config.val_fraction * config.n))
    splits = np.full(config.n, 2, dtype=np.int64)
    splits[order[:n_train]] = 0
    splits[order[n_train:n_train + n_val]] = 1
    train_mask, val_mask, test_mask = masks_from_splits(splits)

    logger.info("sbm_generated", n=config.n, edges=int(adjacency.nnz // 2), classes=config.num_classes, seed=config.seed)
    return Graph(
        n=config.n,
        adjacency=adjacency,
        features=features,
        num_classes=config.num_classes,
        train_mask=train_mask,
        val_mask=val_mask,
        test_mask=test_mask,
        clean_labels=labels,
        name=f"sbm-{config.seed}",
    )


def _resolve_labels(graph: Graph, labels: Optional[np.ndarray]) -> np.ndarray:
    if labels is None:
        labels = graph.clean_labels
    return ensure_labels(labels, graph.n, graph.num_classes)


def edge_homophily(graph: Graph, labels: Optional[np.ndarray] = None) -> float:
    """Fraction of undirected edges whose endpoints share a label."""
    labels = _resolve_labels(graph, labels)
    pairs = graph.edge_pairs()
    if len(pairs) == 0:
        raise UndefinedStatisticError("edge homophily is undefined on a graph without edges", "homophily")
    return float(np.mean(labels[pairs[:, 0]] == labels[pairs[:, 1]]))


def _cross_label_capacity(graph: Graph, labels: np.ndarray) -> int:
    counts = np.bincount(labels, minlength=graph.num_classes).astype(np.int64)
    total = (int(counts.sum()) ** 2 - int(np.sum(counts ** 2))) // 2
    pairs = graph.edge_pairs()
    existing = int(np.sum(labels[pairs[:, 0]] != labels[pairs[:, 1]])) if len(pairs) else 0
    return total - existing


def inject_heterophilous_edges(graph: Graph, count: int, seed: int) -> Graph:
    """
    Add ``count`` uniformly sampled new edges between differently labelled nodes.

    Uses clean labels. Never creates a same-label edge or a duplicate.
    """
    if count < 0:
        raise UsageError("count must be non-negative")
    if graph.clean_labels is None:
        raise GraphValidationError("heterophilous edge injection requires clean labels")
    if count == 0:
        return graph
    labels = graph.clean_labels
    available = _cross_label_capacity(graph, labels)
    if count > available:
        raise SaturationError(f"requested {count} cross-label edges but only {available} cross-label non-edges remain")

    n = graph.n
    rng = np.random.default_rng(seed)
    existing = set((graph.edge_pairs() @ np.array([n, 1], dtype=np.int64)).tolist())

    if count * 2 > available:
        # dense regime: enumerate every candidate and draw without replacement
        upper_u, upper_v = np.triu_indices(n, k=1)
        codes = upper_u * n + upper_v
        candidate = labels[upper_u] != labels[upper_v]
        candidate &= ~np.isin(codes, np.fromiter(existing, dtype=np.int64, count=len(existing)))
        pool = codes[candidate]
        chosen = np.sort(rng.choice(pool, size=count, replace=False))
    else:
        picked: List[int] = []
        seen = set()
        while len(picked) < count:
            draws = rng.integers(0, n, size=(2 * (count - len(picked)) + 16, 2))
            for u, v in draws:
                if u == v or labels[u] == labels[v]:
                    continue
                code = int(min(u, v) * n + max(u, v))
                if code in existing or code in seen:
                    continue
                seen.add(code)
                picked.append(code)
                if len(picked) == count:
                    break
        chosen = np.array(picked, dtype=np.int64)

    new_edges = np.column_stack([chosen // n, chosen % n])
    all_edges = np.vstack([graph.edge_pairs(), new_edges])
    adjacency, _ = adjacency_from_edges(n, all_edges)
    logger.info("heterophilous_edges_injected", count=count, available=available, seed=seed)
    return graph.with_adjacency(adjacency)


def near_boundary_mask(graph: Graph, labels: Optional[np.ndarray] = None) -> np.ndarray:
    """True where some node within two hops carries a different label."""
    labels = _resolve_labels(graph, labels)
    adjacency = graph.adjacency
    reach = (adjacency + adjacency @ adjacency).tocoo()
    mismatch = labels[reach.row] != labels[reach.col]
    near = np.zeros(graph.n, dtype=bool)
    near[reach.row[mismatch]] = True
    return near


def classify_boundary(graph: Graph, labels: Optional[np.ndarray] = None) -> List[BoundaryTag]:
    """
    Tag each node ``far`` iff every node within two hops shares its label.

    Isolated nodes are ``far``.
    """
    near = near_boundary_mask(graph, labels)
    return [BoundaryTag.NEAR if flag else BoundaryTag.FAR for flag in near]
