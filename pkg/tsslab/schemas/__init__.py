"""
tsslab Schemas
Pydantic models for configuration, reports and HTTP payloads
"""

from .api import CbcRequest, CbcSummary, GraphSummary, TrainRequest
from .experiments import (
    CorrelationReport,
    CorrelationRow,
    ExperimentManifest,
    MethodAggregate,
    MetricsReport,
    RunResult,
    SbmConfig,
)
from .noise import NoiseAudit, NoiseKind, NoiseSpec
from .training import (
    DifficultyKind,
    EpochRecord,
    ExtractionScore,
    HistoryRow,
    PacingKind,
    ScheduleKind,
    TrainConfig,
    TssConfig,
)

__all__ = [
    # API
    "CbcRequest",
    "CbcSummary",
    "GraphSummary",
    "TrainRequest",
    # Experiments
    "CorrelationReport",
    "CorrelationRow",
    "ExperimentManifest",
    "MethodAggregate",
    "MetricsReport",
    "RunResult",
    "SbmConfig",
    # Noise
    "NoiseAudit",
    "NoiseKind",
    "NoiseSpec",
    # Training
    "DifficultyKind",
    "EpochRecord",
    "ExtractionScore",
    "HistoryRow",
    "PacingKind",
    "ScheduleKind",
    "TrainConfig",
    "TssConfig",
]
