"""Numeric domain models for tsslab."""

from .centrality import CbcScores
from .gcn import AdamState, GcnParams
from .graph import BoundaryTag, Graph, NormalizedAdjacency
from .noise import TransitionMatrix
from .ppr import PprMatrix
from .trace import TrainTrace

__all__ = [
    "AdamState",
    "BoundaryTag",
    "CbcScores",
    "GcnParams",
    "Graph",
    "NormalizedAdjacency",
    "PprMatrix",
    "TrainTrace",
    "TransitionMatrix",
]
