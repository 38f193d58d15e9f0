"""
Label Noise Schemas
Noise generation requests and audit reports
"""

from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator


class NoiseKind(str, Enum):
    """Synthetic label noise families."""

    SYMMETRIC = "symmetric"
    PAIRFLIP = "pairflip"
    INSTANCE = "instance"


class NoiseSpec(BaseModel):
    """Request to corrupt labels."""

    kind: NoiseKind = Field(..., description="Noise family")
    rate: float = Field(..., ge=0.0, lt=1.0, description="Target flip probability")
    seed: int = Field(0, ge=0, description="RNG seed")
    scope: Literal["train", "train_val", "all"] = Field("train", description="Nodes eligible for corruption")
    std: float = Field(0.1, ge=0.0, description="Std of per-instance flip rates (instance noise only)")

    @model_validator(mode="after")
    def _pairflip_identifiable(self) -> "NoiseSpec":
        if self.kind == NoiseKind.PAIRFLIP and self.rate >= 0.5:
            raise ValueError("pairflip rate must be < 0.5")
        return self

    class Config:
        json_schema_extra = {
            "example": {
                "kind": "symmetric",
                "rate": 0.3,
                "seed": 7,
                "scope": "train"
            }
        }


class NoiseAudit(BaseModel):
    """Empirical corruption achieved by a noise generator."""

    num_classes: int = Field(..., ge=1, description="Number of classes")
    count: int = Field(..., ge=0, description="Number of audited labels")
    confusion: List[List[float]] = Field(..., description="Row-normalised confusion matrix, rows = clean class")
    flip_rate: float = Field(..., ge=0.0, le=1.0, description="Fraction of labels that changed")
    per_class_flip_rate: List[Optional[float]] = Field(..., description="Flip rate per clean class (null if class absent)")

    class Config:
        json_schema_extra = {
            "example": {
                "num_classes": 2,
                "count": 4,
                "confusion": [[0.5, 0.5], [0.0, 1.0]],
                "flip_rate": 0.25,
                "per_class_flip_rate": [0.5, 0.0]
            }
        }
