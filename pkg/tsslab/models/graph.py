"""Graph data models."""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
import scipy.sparse as sp


class BoundaryTag(str, Enum):
    """Topological position of a node relative to class boundaries."""

    FAR = "far"
    NEAR = "near"


def _frozen(array: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if array is None:
        return None
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Immutable undirected graph with node features, labels and splits.

    The adjacency is a binary symmetric CSR matrix without self-loops.
    Construction validates every structural invariant.
    """

    n: int
    adjacency: sp.csr_matrix
    features: np.ndarray
    num_classes: int
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray
    clean_labels: Optional[np.ndarray] = None
    noisy_labels: Optional[np.ndarray] = None
    name: str = field(default="graph", compare=False)

    def __post_init__(self):
        from ..validators import ensure_valid_graph

        adjacency = sp.csr_matrix(self.adjacency, dtype=np.float64)
        adjacency.sort_indices()
        object.__setattr__(self, "adjacency", adjacency)
        object.__setattr__(self, "features", _frozen(np.asarray(self.features, dtype=np.float64)))
        for mask_name in ("train_mask", "val_mask", "test_mask"):
            object.__setattr__(self, mask_name, _frozen(np.asarray(getattr(self, mask_name), dtype=bool)))
        for label_name in ("clean_labels", "noisy_labels"):
            labels = getattr(self, label_name)
            if labels is not None:
                object.__setattr__(self, label_name, _frozen(np.asarray(labels, dtype=np.int64)))
        ensure_valid_graph(self)

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return int(self.adjacency.nnz // 2)

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def train_ids(self) -> np.ndarray:
        return np.flatnonzero(self.train_mask)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    def neighbors(self, node: int) -> np.ndarray:
        start, stop = self.adjacency.indptr[node], self.adjacency.indptr[node + 1]
        return self.adjacency.indices[start:stop]

    def edge_pairs(self) -> np.ndarray:
        """Undirected edges as an (m, 2) array with u < v."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        pairs = np.column_stack([upper.row, upper.col]).astype(np.int64)
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        return pairs[order]

    def with_noisy_labels(self, labels: np.ndarray) -> "Graph":
        return replace(self, noisy_labels=np.asarray(labels, dtype=np.int64))

    def with_adjacency(self, adjacency: sp.csr_matrix) -> "Graph":
        return replace(self, adjacency=adjacency)


@dataclass(frozen=True, eq=False)
class NormalizedAdjacency:
    """D^{-1/2} (A + sI) D^{-1/2} with s recorded in ``self_loops``."""

    matrix: sp.csr_matrix
    self_loops: bool

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])
