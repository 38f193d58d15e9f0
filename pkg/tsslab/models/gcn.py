"""GCN parameter and optimizer state containers."""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np


@dataclass(eq=False)
class GcnParams:
    """Two-layer GCN weights: W1 is d x h, W2 is h x C."""

    W1: np.ndarray
    W2: np.ndarray

    @property
    def hidden(self) -> int:
        return int(self.W1.shape[1])

    @property
    def shapes(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        return tuple(self.W1.shape), tuple(self.W2.shape)

    def copy(self) -> "GcnParams":
        return GcnParams(W1=self.W1.copy(), W2=self.W2.copy())

    def blocks(self):
        return {"W1": self.W1, "W2": self.W2}

    def squared_norm(self) -> float:
        return float(np.sum(self.W1 * self.W1) + np.sum(self.W2 * self.W2))


@dataclass(eq=False)
class AdamState:
    """Adam moments per parameter block."""

    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: GcnParams) -> "AdamState":
        return cls(
            m={name: np.zeros_like(block) for name, block in params.blocks().items()},
            v={name: np.zeros_like(block) for name, block in params.blocks().items()},
        )
