"""Trust-aware signed graph convolutional embeddings."""

from .egonet import EgoEdge, EgoNet, build_all_egonets, build_egonet, infer_path_sign
from .evaluation import MetricsReport, evaluate, train_downstream
from .fextra import decide_trust, extract_features, partition_table, predict_sign, train_fextra
from .graph import SignedDigraph, TriadStats, compute_triad_ratios, load_edge_list, split_edges
from .propagation import ModelParams, forward
from .training import TrainConfig, fit, total_loss

__all__ = [
    "EgoEdge", "EgoNet", "MetricsReport", "ModelParams", "SignedDigraph", "TrainConfig", "TriadStats",
    "build_all_egonets", "build_egonet", "compute_triad_ratios", "decide_trust", "evaluate",
    "extract_features", "fit", "forward", "infer_path_sign", "load_edge_list", "partition_table",
    "predict_sign", "split_edges", "total_loss", "train_downstream", "train_fextra",
]
