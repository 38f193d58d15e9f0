"""Centrality score containers."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class CbcScores:
    """Class-conditional betweenness per node plus the pair-set it was computed over."""

    scores: np.ndarray
    node_set: np.ndarray
    pair_count: int
    skipped_pairs: int
    epsilon: float
    eligible_pairs: int
    sampled: bool = False

    def __post_init__(self):
        self.scores.setflags(write=False)
        self.node_set.setflags(write=False)

    def subset(self, nodes: np.ndarray) -> np.ndarray:
        return self.scores[np.asarray(nodes, dtype=np.int64)]
