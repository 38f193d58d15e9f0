"""Structural validators for tsslab graphs."""

from typing import TYPE_CHECKING, Any, Dict

import numpy as np

from ..errors import GraphValidationError

if TYPE_CHECKING:
    from ..models.graph import Graph


# Invariants every constructed Graph must satisfy
GRAPH_REQUIREMENTS = {
    "square_adjacency": "Adjacency is n x n",
    "symmetric": "Edge (i,j) is stored iff (j,i) is stored",
    "no_self_loops": "No self-loops are stored",
    "binary_edges": "Every stored edge has weight 1 (no duplicates)",
    "feature_rows": "Feature matrix has one row per node",
    "finite_features": "Feature values are finite",
    "mask_shapes": "Masks have one entry per node",
    "masks_disjoint": "Train, val and test masks are pairwise disjoint",
    "label_range": "All labels lie in [0, num_classes)",
}


def _check_labels(labels, graph: "Graph") -> bool:
    if labels is None:
        return True
    labels = np.asarray(labels)
    if labels.shape != (graph.n,):
        return False
    return bool(labels.size == 0 or (labels.min() >= 0 and labels.max() < graph.num_classes))


def audit_graph(graph: "Graph") -> Dict[str, Any]:
    """
    Check every structural invariant of a graph.

    Args:
        graph: Graph to audit

    Returns:
        Audit result with validity flag and per-check details
    """
    adjacency = graph.adjacency
    square = adjacency.shape == (graph.n, graph.n)
    checks = {
        "square_adjacency": square,
        "symmetric": square and (adjacency != adjacency.T).nnz == 0,
        "no_self_loops": square and not np.any(adjacency.diagonal() != 0),
        "binary_edges": bool(np.all(adjacency.data == 1.0)),
        "feature_rows": graph.features.ndim == 2 and graph.features.shape[0] == graph.n,
        "finite_features": bool(np.all(np.isfinite(graph.features))),
        "mask_shapes": all(mask.shape == (graph.n,) for mask in (graph.train_mask, graph.val_mask, graph.test_mask)),
        "label_range": graph.num_classes >= 1
        and _check_labels(graph.clean_labels, graph)
        and _check_labels(graph.noisy_labels, graph),
    }
    if checks["mask_shapes"]:
        overlap = (
            (graph.train_mask & graph.val_mask)
            | (graph.train_mask & graph.test_mask)
            | (graph.val_mask & graph.test_mask)
        )
        checks["masks_disjoint"] = not bool(overlap.any())
    else:
        checks["masks_disjoint"] = False

    details = {
        key: {"passed": bool(checks[key]), "description": description}
        for key, description in GRAPH_REQUIREMENTS.items()
    }
    passed = sum(1 for item in details.values() if item["passed"])
    return {
        "is_valid": passed == len(GRAPH_REQUIREMENTS),
        "passed": passed,
        "total": len(GRAPH_REQUIREMENTS),
        "details": details,
    }


def ensure_valid_graph(graph: "Graph") -> None:
    """Raise GraphValidationError naming the first failed check."""
    report = audit_graph(graph)
    if report["is_valid"]:
        return
    failed = [key for key, item in report["details"].items() if not item["passed"]]
    raise GraphValidationError(
        f"graph '{graph.name}' failed checks: "
        + ", ".join(f"{key} ({GRAPH_REQUIREMENTS[key]})" for key in failed)
    )


def ensure_labels(labels, n: int, num_classes: int, what: str = "labels") -> np.ndarray:
    """Validate a full-length label vector and return it as int64."""
    if labels is None:
        raise GraphValidationError(f"{what} are missing")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise GraphValidationError(f"{what} must have length {n}, got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise GraphValidationError(f"{what} must lie in [0, {num_classes})")
    return labels
