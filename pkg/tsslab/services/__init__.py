"""tsslab services - catalog of the operations the toolkit exposes."""

from typing import Any, Dict, List, Optional


class TssServices:
    """
    Catalog of tsslab operations grouped by concern.
    Backs the service index served at ``GET /`` and ``GET /v1/capabilities``.
    """

    def __init__(self):
        """Initialize the catalog."""
        self.services = self._build_services()

    def _build_services(self) -> Dict[str, Any]:
        """Build the operation catalog."""
        return {
            "graphs": {
                "generate_sbm": {"module": "tsslab.services.graphs", "http": "POST /v1/graphs/sbm", "cli": "gen"},
                "edge_homophily": {"module": "tsslab.services.graphs", "http": "GET /v1/graphs/{graph_id}"},
                "inject_heterophilous_edges": {"module": "tsslab.services.graphs"},
                "classify_boundary": {"module": "tsslab.services.graphs"},
                "load_graph": {"module": "tsslab.io.graph_files"},
                "convert_planetoid": {"module": "tsslab.integrations.planetoid"},
            },
            "ppr": {
                "ppr_matrix": {"module": "tsslab.services.ppr"},
                "ppr_dense": {"module": "tsslab.services.ppr"},
                "ppr_row": {"module": "tsslab.services.ppr"},
            },
            "centrality": {
                "cbc_scores": {"module": "tsslab.services.centrality", "http": "POST /v1/graphs/{graph_id}/cbc", "cli": "cbc"},
                "betweenness_centrality": {"module": "tsslab.services.centrality"},
                "shortest_path_cbc": {"module": "tsslab.services.centrality"},
                "rank_correlation": {"module": "tsslab.services.centrality"},
            },
            "noise": {
                "transition_matrix": {"module": "tsslab.services.noise"},
                "apply_class_noise": {"module": "tsslab.services.noise"},
                "instance_noise": {"module": "tsslab.services.noise"},
                "noise_audit": {"module": "tsslab.services.noise", "http": "POST /v1/graphs/{graph_id}/noise", "cli": "corrupt"},
            },
            "training": {
                "train_plain": {"module": "tsslab.services.gcn", "http": "POST /v1/graphs/{graph_id}/train", "cli": "train"},
                "run_tss": {"module": "tsslab.services.curriculum", "http": "POST /v1/graphs/{graph_id}/train", "cli": "train"},
                "cbc_fscore_correlation": {"module": "tsslab.services.curriculum", "cli": "train --correlation-subsets"},
            },
            "experiments": {
                "run_experiment": {"module": "tsslab.services.experiments", "cli": "train --seeds"},
                "run_sweep": {"module": "tsslab.services.experiments", "cli": "sweep"},
            },
        }

    def get_all_services(self) -> Dict[str, Any]:
        """Return the full catalog."""
        return self.services

    def get_service_category(self, category: str) -> Dict[str, Any]:
        """Get operations by category."""
        return self.services.get(category, {})

    def get_service_names(self, category: Optional[str] = None) -> List[str]:
        """Operation names, optionally filtered by category."""
        if category:
            return list(self.services.get(category, {}).keys())
        names: List[str] = []
        for operations in self.services.values():
            names.extend(operations.keys())
        return names
