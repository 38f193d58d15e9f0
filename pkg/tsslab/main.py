"""
tsslab API - Main Application
Topological Sample Selection lab over HTTP

Generate or hold graphs in memory, corrupt their labels, inspect
class-conditional betweenness and train GCNs with or without the topological
curriculum. Every endpoint is a thin wrapper over ``tsslab.services``.
"""

import hashlib
import json
from typing import Dict, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from . import __version__
from .errors import (
    GraphValidationError,
    NoiseConfigError,
    SaturationError,
    ShapeError,
    TssError,
    UsageError,
)
from .log import configure_logging, get_logger
from .models.graph import BoundaryTag, Graph
from .schemas import (
    CbcRequest,
    CbcSummary,
    GraphSummary,
    NoiseAudit,
    NoiseSpec,
    RunResult,
    SbmConfig,
    TrainRequest,
)
from .services import TssServices
from .services.curriculum import topological_cbc
from .services.experiments import run_method
from .services.graphs import classify_boundary, edge_homophily, generate_sbm_from_config
from .services.noise import corrupt_graph_labels, noise_audit, scope_mask

configure_logging()
logger = get_logger(__name__)

app = FastAPI(
    title="tsslab API - Topological Sample Selection",
    description="""
    ## tsslab: learning GCNs from noisy node labels

    Training nodes are ordered by class-conditional betweenness centrality
    (CBC), a PPR-based measure of how strongly a node sits between differently
    labelled regions. A paced curriculum then trains on the confident members
    of a growing easy-to-hard pool.

    ### Graph endpoints (v1)

    - **POST /v1/graphs/sbm** - Generate a stochastic block model graph
    - **GET /v1/graphs/{graph_id}** - Summary of a stored graph
    - **POST /v1/graphs/{graph_id}/noise** - Attach synthetic noisy labels
    - **POST /v1/graphs/{graph_id}/cbc** - CBC distribution by boundary position
    - **POST /v1/graphs/{graph_id}/train** - Train plain or curriculum GCN

    Graphs live in process memory and are lost on restart.
    """,
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

tss_services = TssServices()

# In-memory graph storage keyed by graph id
graphs_store: Dict[str, Graph] = {}


def _http_error(exc: TssError) -> HTTPException:
    if isinstance(exc, SaturationError):
        return HTTPException(status_code=409, detail=str(exc))
    if isinstance(exc, (UsageError, GraphValidationError, NoiseConfigError, ShapeError)):
        return HTTPException(status_code=422, detail=str(exc))
    return HTTPException(status_code=400, detail=str(exc))


def _get_graph(graph_id: str) -> Graph:
    graph = graphs_store.get(graph_id)
    if graph is None:
        raise HTTPException(status_code=404, detail=f"Graph '{graph_id}' not found")
    return graph


def _summary(graph_id: str, graph: Graph) -> GraphSummary:
    try:
        homophily = edge_homophily(graph)
    except TssError:
        homophily = None
    return GraphSummary(
        graph_id=graph_id,
        n=graph.n,
        num_edges=graph.num_edges,
        num_classes=graph.num_classes,
        feature_dim=graph.feature_dim,
        homophily=homophily,
        has_noisy_labels=graph.noisy_labels is not None,
    )


# ============================================================================
# Graphs v1
# ============================================================================

@app.post("/v1/graphs/sbm", response_model=GraphSummary, status_code=201, tags=["Graphs v1"])
def create_sbm_graph(config: SbmConfig):
    """
    Generate a balanced SBM graph and store it.

    The graph id is derived from the configuration, so repeating a request
    returns the stored graph instead of a duplicate.
    """
    digest = hashlib.sha256(json.dumps(config.model_dump(), sort_keys=True).encode()).hexdigest()
    graph_id = f"g_{digest[:12]}"
    if graph_id not in graphs_store:
        try:
            graphs_store[graph_id] = generate_sbm_from_config(config)
        except TssError as exc:
            raise _http_error(exc)
        logger.info("graph_stored", graph_id=graph_id, n=config.n)
    return _summary(graph_id, graphs_store[graph_id])


@app.get("/v1/graphs/{graph_id}", response_model=GraphSummary, tags=["Graphs v1"])
def get_graph(graph_id: str):
    """Summary of a stored graph."""
    return _summary(graph_id, _get_graph(graph_id))


@app.post("/v1/graphs/{graph_id}/noise", response_model=NoiseAudit, tags=["Graphs v1"])
def corrupt_graph(graph_id: str, spec: NoiseSpec):
    """
    Corrupt the graph's clean labels and attach them as its noisy labels.

    Replaces any previously attached noisy labels. The audit covers the nodes
    in the requested scope.
    """
    graph = _get_graph(graph_id)
    try:
        noisy = corrupt_graph_labels(graph, spec)
    except TssError as exc:
        raise _http_error(exc)
    graphs_store[graph_id] = graph.with_noisy_labels(noisy)
    mask = scope_mask(graph, spec.scope)
    return noise_audit(graph.clean_labels[mask], noisy[mask], graph.num_classes)


@app.post("/v1/graphs/{graph_id}/cbc", response_model=CbcSummary, tags=["Graphs v1"])
def compute_cbc(graph_id: str, request: CbcRequest):
    """
    CBC over the training nodes, using the attached noisy labels when present.

    Near/far means use the clean-label boundary convention.
    """
    graph = _get_graph(graph_id)
    labels = graph.noisy_labels if graph.noisy_labels is not None else graph.clean_labels
    if labels is None:
        raise HTTPException(status_code=422, detail="Graph has no labels")
    train_ids = graph.train_ids
    try:
        cbc = topological_cbc(
            graph, labels, train_ids,
            alpha=request.alpha, epsilon=request.epsilon, pair_budget=request.pair_budget, seed=request.seed,
        )
    except TssError as exc:
        raise _http_error(exc)

    tags = np.array([tag == BoundaryTag.NEAR for tag in classify_boundary(graph)])[train_ids]
    scores = cbc.subset(train_ids)
    order = np.lexsort((train_ids, -scores))
    return CbcSummary(
        graph_id=graph_id,
        alpha=request.alpha,
        pair_count=cbc.pair_count,
        skipped_pairs=cbc.skipped_pairs,
        near_mean=float(scores[tags].mean()) if tags.any() else None,
        far_mean=float(scores[~tags].mean()) if (~tags).any() else None,
        top_nodes=[int(i) for i in train_ids[order][: request.top_k]],
    )


@app.post("/v1/graphs/{graph_id}/train", response_model=RunResult, tags=["Graphs v1"])
def train_graph(graph_id: str, request: TrainRequest):
    """Train one model on the graph's noisy labels (clean labels when none are attached)."""
    graph = _get_graph(graph_id)
    labels = graph.noisy_labels if graph.noisy_labels is not None else graph.clean_labels
    if labels is None:
        raise HTTPException(status_code=422, detail="Graph has no labels")
    try:
        result = run_method(graph, labels, request.method, request.config, seed=request.config.seed).result
    except TssError as exc:
        raise _http_error(exc)
    return result


@app.get("/v1/capabilities", tags=["Graphs v1"])
async def list_capabilities(category: Optional[str] = None):
    """Operation catalog, optionally filtered by category."""
    if category:
        operations = tss_services.get_service_category(category)
        if not operations:
            raise HTTPException(status_code=404, detail=f"Category '{category}' not found")
        return {"category": category, "operations": operations}
    return {"categories": tss_services.get_all_services(), "total": len(tss_services.get_service_names())}


# ============================================================================
# Health & Root
# ============================================================================

@app.get("/health", tags=["Health"])
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy", "service": "tsslab API", "graphs": len(graphs_store)}


@app.get("/", tags=["Root"])
async def root():
    """Root endpoint with API information."""
    return {
        "name": "tsslab API - Topological Sample Selection",
        "version": __version__,
        "api_versions": {"v1": "/v1"},
        "docs": "/docs",
        "health": "/health",
        "operations": tss_services.get_service_names(),
    }


tags_metadata = [
    {
        "name": "Graphs v1",
        "description": "Graph generation, label corruption, CBC and training"
    },
    {
        "name": "Health",
        "description": "Health check endpoints"
    },
    {
        "name": "Root",
        "description": "Root endpoints and API information"
    }
]

app.openapi_tags = tags_metadata
