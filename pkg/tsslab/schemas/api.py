"""
HTTP Schemas
Request and response bodies for the tsslab service
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, Field

from .training import TssConfig


class GraphSummary(BaseModel):
    """Summary of a graph held by the service."""

    graph_id: str = Field(..., description="Service-assigned graph identifier")
    n: int = Field(..., description="Node count")
    num_edges: int = Field(..., description="Undirected edge count")
    num_classes: int = Field(..., description="Number of classes")
    feature_dim: int = Field(..., description="Feature dimension")
    homophily: Optional[float] = Field(None, description="Edge homophily of clean labels")
    has_noisy_labels: bool = Field(False, description="Whether noisy labels are attached")

    class Config:
        json_schema_extra = {
            "example": {
                "graph_id": "g_3f2a1c9d0e4b",
                "n": 600,
                "num_edges": 3100,
                "num_classes": 3,
                "feature_dim": 16,
                "homophily": 0.83,
                "has_noisy_labels": False
            }
        }


class CbcRequest(BaseModel):
    """CBC computation request."""

    alpha: float = Field(0.15, gt=0.0, le=1.0, description="PPR teleport probability")
    epsilon: float = Field(1e-12, gt=0.0, description="Denominator floor")
    pair_budget: Optional[int] = Field(None, ge=1, description="Pair budget (None = automatic)")
    seed: int = Field(0, ge=0, description="Sampling seed")
    top_k: int = Field(10, ge=0, description="Number of highest-scoring nodes to return")


class CbcSummary(BaseModel):
    """CBC distribution summary split by boundary position."""

    graph_id: str
    alpha: float
    pair_count: int
    skipped_pairs: int
    near_mean: Optional[float] = Field(None, description="Mean CBC of near-boundary training nodes")
    far_mean: Optional[float] = Field(None, description="Mean CBC of far-from-boundary training nodes")
    top_nodes: List[int] = Field(default_factory=list, description="Highest-CBC training nodes")


class TrainRequest(BaseModel):
    """Training request."""

    method: Literal["plain", "tss"] = Field("tss", description="Training method")
    config: TssConfig = Field(default_factory=TssConfig, description="Curriculum and training configuration")
