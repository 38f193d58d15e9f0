"""
Experiment Schemas
Manifests, synthetic-graph parameters and machine-readable reports
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class SbmConfig(BaseModel):
    """Balanced stochastic block model parameters."""

    n: int = Field(600, ge=1, description="Node count")
    num_classes: int = Field(3, ge=1, description="Number of blocks / classes")
    p_in: float = Field(0.05, ge=0.0, le=1.0, description="Intra-class edge probability")
    p_out: float = Field(0.005, ge=0.0, le=1.0, description="Inter-class edge probability")
    feature_dim: int = Field(16, ge=1, description="Feature dimension")
    feature_shift: float = Field(1.0, ge=0.0, description="Distance between class feature means")
    seed: int = Field(0, ge=0, description="RNG seed")
    train_fraction: float = Field(0.6, gt=0.0, le=1.0, description="Share of nodes in the train split")
    val_fraction: float = Field(0.2, ge=0.0, lt=1.0, description="Share of nodes in the val split")

    @model_validator(mode="after")
    def _consistent(self) -> "SbmConfig":
        if self.p_out > self.p_in:
            raise ValueError("p_out must not exceed p_in")
        if self.n % self.num_classes:
            raise ValueError("n must be divisible by num_classes")
        if self.train_fraction + self.val_fraction > 1.0:
            raise ValueError("train_fraction + val_fraction must not exceed 1")
        return self

    class Config:
        json_schema_extra = {
            "example": {
                "n": 600,
                "num_classes": 3,
                "p_in": 0.05,
                "p_out": 0.005,
                "feature_dim": 16,
                "feature_shift": 1.0,
                "seed": 0
            }
        }


class ExperimentManifest(BaseModel):
    """Everything needed to reproduce a command's outputs."""

    command: str = Field(..., description="CLI command that produced the outputs")
    tool_version: str = Field(..., description="tsslab version")
    config: Dict[str, Any] = Field(default_factory=dict, description="Echo of every configuration value")
    seeds: List[int] = Field(default_factory=list, description="Seeds used, in run order")
    input_hashes: Dict[str, str] = Field(default_factory=dict, description="sha256 of each input file, keyed by file name")
    outputs: List[str] = Field(default_factory=list, description="Output file names relative to the output directory")
    stats: Dict[str, Any] = Field(default_factory=dict, description="Deterministic summary statistics of the inputs")


class RunResult(BaseModel):
    """One method run on one seed."""

    method: str = Field(..., description="plain or tss")
    seed: int = Field(..., description="Run seed")
    test_acc: float = Field(..., ge=0.0, le=1.0, description="Accuracy on the test split (clean labels when known)")
    val_acc: Optional[float] = Field(None, description="Best noisy-validation accuracy")
    best_epoch: Optional[int] = Field(None, description="Epoch of the selected checkpoint")
    epochs_run: int = Field(0, ge=0, description="Epochs actually executed")
    cell: Dict[str, Any] = Field(default_factory=dict, description="Sweep cell parameters")


class MethodAggregate(BaseModel):
    """Mean and population standard deviation over seeds."""

    method: str
    cell: Dict[str, Any] = Field(default_factory=dict)
    mean: float
    std: float
    n: int


class CorrelationRow(BaseModel):
    """One random training subset in the CBC / extraction-quality study."""

    subset: int
    mean_cbc: float
    precision: Optional[float] = None
    recall: Optional[float] = None
    fscore: Optional[float] = None


class CorrelationReport(BaseModel):
    """Pearson correlation between subset mean CBC and extraction F-score."""

    pearson_r: float
    p_value: float
    num_subsets: int
    subset_size: int
    rows: List[CorrelationRow] = Field(default_factory=list)


class MetricsReport(BaseModel):
    """Per-seed and aggregate results of an experiment."""

    runs: List[RunResult] = Field(default_factory=list)
    aggregate: List[MethodAggregate] = Field(default_factory=list)
    extraction: Dict[str, List[Optional[float]]] = Field(
        default_factory=dict, description="Per-epoch extraction F-score keyed by 'method:seed'"
    )
    correlation: Optional[CorrelationReport] = None
