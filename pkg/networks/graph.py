"""
Directed explanatory / prediction networks between assets.
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Optional, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd

from config import NetworkDefaults
from errors import DomainError


class NetworkKind(str, Enum):
    EXPLANATORY = "explanatory"   # contemporaneous returns of j explain returns of i
    PREDICTION = "prediction"     # lagged returns of j predict returns of i


@dataclass(frozen=True)
class DirectedNetwork:
    """Edges (j, i) mean asset j explains or predicts asset i."""
    nodes: Tuple[str, ...]
    edges: FrozenSet[Tuple[str, str]]
    window_end: pd.Timestamp
    kind: NetworkKind
    q: float
    sectors: Optional[Dict[str, str]] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", frozenset(self.edges))
        object.__setattr__(self, "kind", NetworkKind(self.kind))
        known = set(self.nodes)
        for source, target in self.edges:
            if source == target:
                raise DomainError(f"self-loop on {source}")
            if source not in known or target not in known:
                raise DomainError(f"edge {source}->{target} references an unknown node")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def predictors(self, asset: str) -> Tuple[str, ...]:
        """Sources pointing at ``asset`` (P_{i,t} for prediction networks)."""
        return tuple(sorted(s for s, t in self.edges if t == asset))

    def in_degree(self) -> np.ndarray:
        counts = {n: 0 for n in self.nodes}
        for _, target in self.edges:
            counts[target] += 1
        return np.array([counts[n] for n in self.nodes])

    def out_degree(self) -> np.ndarray:
        counts = {n: 0 for n in self.nodes}
        for source, _ in self.edges:
            counts[source] += 1
        return np.array([counts[n] for n in self.nodes])

    def edge_index(self) -> np.ndarray:
        """Edges as an (m, 2) array of node positions, in sorted order."""
        position = {n: k for k, n in enumerate(self.nodes)}
        pairs = sorted((position[s], position[t]) for s, t in self.edges)
        return np.array(pairs, dtype=int).reshape(-1, 2)

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        for node in self.nodes:
            label = NetworkDefaults.UNCLASSIFIED
            if self.sectors is not None:
                label = self.sectors.get(node, NetworkDefaults.UNCLASSIFIED)
            graph.add_node(node, sector=label)
        graph.add_edges_from(sorted(self.edges))
        return graph


def write_edges(networks: Iterable[DirectedNetwork], path: Union[str, Path]):
    """Edge list CSV: window_end,source,target (one row per edge)."""
    rows = []
    for net in networks:
        end = pd.Timestamp(net.window_end).strftime("%Y-%m-%d")
        rows.extend({"window_end": end, "source": s, "target": t} for s, t in sorted(net.edges))
    pd.DataFrame(rows, columns=["window_end", "source", "target"]).to_csv(path, index=False)
