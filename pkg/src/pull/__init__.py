"""Positive-unlabeled link prediction on edge-incomplete graphs."""

from .data import gen_sbm
from .errors import ArgumentError, CapacityError, NumericError, ValidationError
from .graph import Graph, WeightedGraph, candidate_pairs, normalized_adjacency, top_m_nodes
from .gcn import GCNParams, init_params
from .splitter import Split, split
from .trainer import TrainConfig, evaluate_checkpoint, train_baseline_gcn_ce, train_pull

__all__ = [
    "ArgumentError", "CapacityError", "NumericError", "ValidationError",
    "Graph", "WeightedGraph", "candidate_pairs", "normalized_adjacency", "top_m_nodes",
    "GCNParams", "init_params", "Split", "split",
    "TrainConfig", "evaluate_checkpoint", "train_baseline_gcn_ce", "train_pull", "gen_sbm",
]
