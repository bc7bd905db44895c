"""Stay-point clustering, hierarchical graph, HITS ranking, sequences."""
from .hits import HitsScores, hits_scores, rank_pois, visit_matrix
from .optics import (
    NOISE,
    UNDEFINED,
    OpticsOrdering,
    OpticsParams,
    PoiCluster,
    cluster_labels,
    distance_matrix,
    extract_clusters,
    optics_order,
    summarize_clusters,
)
from .sequences import TravelSequence, mine_sequences, score_path, simple_paths
from .tbhg import Edge, Tbhg, TbhgLevel, build_tbhg, transition_graph, transition_runs, user_sequences

__all__ = [
    "NOISE", "UNDEFINED", "Edge", "HitsScores", "OpticsOrdering", "OpticsParams",
    "PoiCluster", "Tbhg", "TbhgLevel", "TravelSequence", "build_tbhg",
    "cluster_labels", "distance_matrix", "extract_clusters", "hits_scores",
    "mine_sequences", "optics_order", "rank_pois", "score_path", "simple_paths",
    "summarize_clusters", "transition_graph", "transition_runs",
    "user_sequences", "visit_matrix",
]
