"""
Networks package - explanatory and prediction networks inferred asset by asset,
plus their topological metrics.
"""

from networks.graph import DirectedNetwork, NetworkKind, write_edges
from networks.inference import infer_network, infer_networks
from networks.metrics import (NetworkMetrics, adjusted_reciprocity, degree_pearson, metrics,
                              metrics_table, metrics_timeseries, reciprocity, rewire,
                              sector_assortativity, write_metrics)

__all__ = [
    "DirectedNetwork", "NetworkKind", "write_edges",
    "infer_network", "infer_networks",
    "NetworkMetrics", "adjusted_reciprocity", "degree_pearson", "metrics", "metrics_table",
    "metrics_timeseries", "reciprocity", "rewire", "sector_assortativity", "write_metrics",
]
