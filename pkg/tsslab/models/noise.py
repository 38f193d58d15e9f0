"""Noise model containers."""

from dataclasses import dataclass

import numpy as np

from ..errors import NoiseConfigError


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic C x C matrix, T[a][b] = P(noisy=b | clean=a)."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise NoiseConfigError(f"transition matrix must be square, got shape {matrix.shape}")
        if np.any(matrix < 0):
            raise NoiseConfigError("transition matrix has negative entries")
        if not np.allclose(matrix.sum(axis=1), 1.0, atol=1e-12, rtol=0.0):
            raise NoiseConfigError("transition matrix rows must sum to 1")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def num_classes(self) -> int:
        return int(self.matrix.shape[0])
