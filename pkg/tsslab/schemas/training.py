"""
Training Schemas
Hyperparameters for plain GCN training and the topological curriculum
"""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field


class PacingKind(str, Enum):
    """Pacing functions controlling the candidate-pool fraction."""

    LINEAR = "linear"
    ROOT = "root"
    GEOMETRIC = "geometric"


class DifficultyKind(str, Enum):
    """Difficulty measurers used to order training nodes."""

    CBC = "cbc"
    FEATURE = "feature"
    NEIGHBORHOOD = "neighborhood"


class ScheduleKind(str, Enum):
    """Curriculum schedule: paced pools or a one-shot extraction."""

    CURRICULUM = "curriculum"
    VANILLA = "vanilla"


class TrainConfig(BaseModel):
    """Full-batch GCN training configuration."""

    lr: float = Field(0.01, gt=0.0, description="Adam learning rate")
    weight_decay: float = Field(5e-4, ge=0.0, description="L2 penalty coefficient")
    hidden: int = Field(16, ge=1, description="Hidden layer width")
    epochs: int = Field(200, ge=1, description="Training epochs")
    seed: int = Field(0, ge=0, description="Initialisation seed")
    patience: Optional[int] = Field(None, ge=1, description="Early-stop patience on noisy-val accuracy")
    dropout: float = Field(0.0, ge=0.0, lt=1.0, description="Dropout rate (0 disables)")

    class Config:
        json_schema_extra = {
            "example": {
                "lr": 0.01,
                "weight_decay": 0.0005,
                "hidden": 16,
                "epochs": 200,
                "seed": 0
            }
        }


class TssConfig(BaseModel):
    """Topological Sample Selection hyperparameters."""

    alpha: float = Field(0.15, gt=0.0, le=1.0, description="PPR teleport probability")
    lambda0: float = Field(0.5, gt=0.0, le=1.0, description="Initial pace")
    T: int = Field(500, ge=1, description="Curriculum epochs")
    pacing: PacingKind = Field(PacingKind.LINEAR, description="Pacing function")
    pretrain_epochs: int = Field(400, ge=1, description="Epochs for the pretrained extractor")
    train: TrainConfig = Field(default_factory=TrainConfig, description="Retrained model configuration")
    noisy_val_fraction: float = Field(0.10, ge=0.0, lt=1.0, description="Share of training nodes held out as noisy validation")
    patience: Optional[int] = Field(100, ge=1, description="Early-stop patience once the pace reaches 1")
    epsilon: float = Field(1e-12, gt=0.0, description="CBC denominator floor")
    pair_budget: Optional[int] = Field(None, ge=1, description="CBC pair budget (None = automatic)")
    tol: float = Field(1e-9, gt=0.0, description="Iterative PPR tolerance")
    difficulty: DifficultyKind = Field(DifficultyKind.CBC, description="Difficulty measurer")
    schedule: ScheduleKind = Field(ScheduleKind.CURRICULUM, description="Curriculum schedule")
    refresh_every: Optional[int] = Field(None, ge=1, description="Re-extract with the current model every k epochs")
    seed: int = Field(0, ge=0, description="Root seed for splits and CBC sampling")

    class Config:
        json_schema_extra = {
            "example": {
                "alpha": 0.15,
                "lambda0": 0.5,
                "T": 500,
                "pacing": "linear",
                "pretrain_epochs": 400,
                "noisy_val_fraction": 0.1
            }
        }


class HistoryRow(BaseModel):
    """One epoch of plain training."""

    epoch: int
    loss: float
    train_acc: float
    val_acc: Optional[float] = None
    test_acc: Optional[float] = None


class ExtractionScore(BaseModel):
    """Quality of a confident-node extraction against ground truth."""

    precision: Optional[float] = Field(None, description="Clean share of extracted nodes")
    recall: Optional[float] = Field(None, description="Extracted share of clean pool nodes")
    fscore: Optional[float] = Field(None, description="Harmonic mean, null when undefined")


class EpochRecord(BaseModel):
    """One epoch of the topological curriculum."""

    t: int
    lambda_t: float
    pool_size: int
    confident_size: int
    confident_ids: List[int] = Field(default_factory=list)
    loss: Optional[float] = None
    val_acc: Optional[float] = None
    test_acc: Optional[float] = None
    skipped: bool = False
    extraction: Optional[ExtractionScore] = None
