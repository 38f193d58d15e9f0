"""Personalized PageRank matrix model."""

from dataclasses import dataclass
from typing import Literal

import numpy as np


@dataclass(frozen=True, eq=False)
class PprMatrix:
    """
    Rows of pi = alpha (I - (1 - alpha) A_hat)^{-1}.

    ``rows[k]`` is the row of source node ``sources[k]``. Dense solves always
    hold every row; iterative solves may hold a subset.
    """

    alpha: float
    rows: np.ndarray
    sources: np.ndarray
    residual_bound: float
    method: Literal["dense_inverse", "iterative"]
    tol: float

    def __post_init__(self):
        self.rows.setflags(write=False)
        self.sources.setflags(write=False)
        index = np.full(self.n, -1, dtype=np.int64)
        index[self.sources] = np.arange(len(self.sources))
        object.__setattr__(self, "_row_index", index)

    @property
    def n(self) -> int:
        return int(self.rows.shape[1])

    def has_row(self, node: int) -> bool:
        return bool(self._row_index[node] >= 0)

    def row(self, node: int) -> np.ndarray:
        position = self._row_index[node]
        if position < 0:
            raise KeyError(f"PPR row for node {node} was not computed")
        return self.rows[position]

    def entry(self, u: int, v: int) -> float:
        return float(self.row(u)[v])

    def submatrix(self, nodes: np.ndarray) -> np.ndarray:
        """pi restricted to ``nodes`` x ``nodes`` (every node must have a row)."""
        nodes = np.asarray(nodes, dtype=np.int64)
        positions = self._row_index[nodes]
        if np.any(positions < 0):
            missing = nodes[positions < 0][:5].tolist()
            raise KeyError(f"PPR rows missing for nodes {missing}")
        return self.rows[positions][:, nodes]

    def dense(self) -> np.ndarray:
        """Full n x n matrix; only valid when every row was computed."""
        return self.submatrix(np.arange(self.n))
