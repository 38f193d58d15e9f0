"""Curriculum trace model."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..schemas.training import EpochRecord
from .gcn import GcnParams


@dataclass(eq=False)
class TrainTrace:
    """Append-only per-epoch record of a curriculum run."""

    sorted_order: np.ndarray
    fit_ids: np.ndarray
    noisy_val_ids: np.ndarray
    records: List[EpochRecord] = field(default_factory=list)
    params: Optional[GcnParams] = None
    best_epoch: Optional[int] = None
    best_val_acc: Optional[float] = None

    def append(self, record: EpochRecord) -> None:
        self.records.append(record)

    @property
    def lambdas(self) -> List[float]:
        return [record.lambda_t for record in self.records]

    @property
    def pool_sizes(self) -> List[int]:
        return [record.pool_size for record in self.records]
