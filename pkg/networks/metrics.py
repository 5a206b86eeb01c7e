"""
Topological summaries of directed networks and their degree-preserving nulls.
"""

import logging
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd
from scipy import stats

from config import NetworkDefaults
from errors import DomainError
from learners import ForestSettings
from market.panel import ReturnsPanel
from market.windows import WindowPlan
from networks.graph import DirectedNetwork, NetworkKind
from networks.inference import infer_networks
from selection import StatisticMethod
from utils.parallel import run_tasks
from utils.seeding import derive_seed, rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetworkMetrics:
    n_nodes: int
    n_edges: int
    density: float
    reciprocity: float
    reciprocity_null_mean: float
    reciprocity_null_sd: float
    reciprocity_adjusted: float
    assortativity: float
    assortativity_null_mean: float
    assortativity_null_sd: float
    degree_pearson: float

    def as_row(self) -> dict:
        return asdict(self)

    @classmethod
    def undefined(cls, n_nodes: int, n_edges: int = 0) -> "NetworkMetrics":
        nan = float("nan")
        return cls(n_nodes=n_nodes, n_edges=n_edges, density=nan, reciprocity=nan,
                   reciprocity_null_mean=nan, reciprocity_null_sd=nan, reciprocity_adjusted=nan,
                   assortativity=nan, assortativity_null_mean=nan, assortativity_null_sd=nan,
                   degree_pearson=nan)


def reciprocity(graph: nx.DiGraph) -> float:
    """Fraction of edges whose reverse is also present; NaN without edges."""
    if graph.number_of_edges() == 0:
        return float("nan")
    return float(nx.overall_reciprocity(graph))


def adjusted_reciprocity(r: float, density: float) -> float:
    """(r - a) / (1 - a): positive means more reciprocal than chance."""
    if np.isnan(r) or density >= 1.0:
        return float("nan")
    return (r - density) / (1.0 - density)


def sector_assortativity(graph: nx.DiGraph) -> float:
    """Newman assortativity of the 'sector' node label over directed edges."""
    if graph.number_of_edges() == 0:
        return float("nan")
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        warnings.simplefilter("ignore", RuntimeWarning)
        value = float(nx.attribute_assortativity_coefficient(graph, "sector"))
    return value if np.isfinite(value) else float("nan")


def degree_pearson(net: DirectedNetwork) -> float:
    """Pearson correlation between in- and out-degrees across nodes."""
    k_in, k_out = net.in_degree(), net.out_degree()
    if k_in.size < 2 or np.ptp(k_in) == 0 or np.ptp(k_out) == 0:
        return float("nan")
    return float(stats.pearsonr(k_in, k_out)[0])


def rewire(edges: np.ndarray, n_swaps: int, generator: np.random.Generator) -> np.ndarray:
    """
    Degree-preserving randomization by directed double edge swaps:
    (a->b, c->d) becomes (a->d, c->b) unless that creates a self-loop or a
    duplicate edge. Every node keeps its in- and out-degree.
    """
    pairs = [tuple(e) for e in np.asarray(edges, dtype=int).reshape(-1, 2).tolist()]
    m = len(pairs)
    if m < 2:
        return np.array(pairs, dtype=int).reshape(-1, 2)
    present = set(pairs)
    picks = generator.integers(0, m, size=(n_swaps, 2))
    for e1, e2 in picks.tolist():
        if e1 == e2:
            continue
        a, b = pairs[e1]
        c, d = pairs[e2]
        if a == c or b == d or a == d or c == b:
            continue
        if (a, d) in present or (c, b) in present:
            continue
        present.difference_update(((a, b), (c, d)))
        present.update(((a, d), (c, b)))
        pairs[e1], pairs[e2] = (a, d), (c, b)
    return np.array(pairs, dtype=int).reshape(-1, 2)


def metrics(net: DirectedNetwork, null_samples: int = NetworkDefaults.NULL_SAMPLES,
            seed: int = 0) -> NetworkMetrics:
    """Density, reciprocity, sector assortativity and degree correlation with null statistics."""
    N, m = net.n_nodes, net.n_edges
    if N < 2:
        raise DomainError(f"network metrics need at least 2 nodes, got {N}")
    if null_samples < 0:
        raise DomainError(f"null_samples must be >= 0, got {null_samples}")
    density = m / (N * (N - 1))
    graph = net.to_networkx()
    r = reciprocity(graph)
    # a partial sector map leaves assortativity undefined
    labelled = net.sectors is not None and all(n in net.sectors for n in net.nodes)
    assort = sector_assortativity(graph) if labelled else float("nan")

    null_r, null_a = [], []
    if m > 0:
        edge_index = net.edge_index()
        labels = {k: graph.nodes[n]["sector"] for k, n in enumerate(net.nodes)}
        n_swaps = NetworkDefaults.SWAPS_PER_EDGE * m
        for k in range(null_samples):
            shuffled = rewire(edge_index, n_swaps, rng(derive_seed(seed, k)))
            null = nx.DiGraph()
            null.add_nodes_from((k_, {"sector": label}) for k_, label in labels.items())
            null.add_edges_from(map(tuple, shuffled.tolist()))
            null_r.append(reciprocity(null))
            if labelled:
                null_a.append(sector_assortativity(null))

    r_mean, r_sd = _moments(null_r)
    a_mean, a_sd = _moments(null_a)
    return NetworkMetrics(n_nodes=N, n_edges=m, density=density, reciprocity=r,
                          reciprocity_null_mean=r_mean, reciprocity_null_sd=r_sd,
                          reciprocity_adjusted=adjusted_reciprocity(r, density),
                          assortativity=assort, assortativity_null_mean=a_mean,
                          assortativity_null_sd=a_sd, degree_pearson=degree_pearson(net))


def metrics_table(networks: Sequence[DirectedNetwork], null_samples: int = NetworkDefaults.NULL_SAMPLES,
                  seed: int = 0, workers: int = 1) -> pd.DataFrame:
    """
    One metrics row per network, indexed by window end; network w is seeded
    derive_seed(seed, w). Networks with fewer than two nodes get a row of NaN.
    """
    tasks, degenerate = [], []
    for w, net in enumerate(networks):
        if net.n_nodes < 2:
            logger.warning("Network ending %s has %d node(s); metrics left undefined",
                           pd.Timestamp(net.window_end).date(), net.n_nodes)
            degenerate.append(w)
        else:
            tasks.append((net, null_samples, derive_seed(seed, w)))
    results = iter(run_tasks(metrics, tasks, workers))
    rows = []
    for w, net in enumerate(networks):
        result = NetworkMetrics.undefined(net.n_nodes, net.n_edges) if w in degenerate else next(results)
        rows.append({"window_end": pd.Timestamp(net.window_end), **result.as_row()})
    columns = ["window_end"] + list(NetworkMetrics.__dataclass_fields__)
    return pd.DataFrame(rows, columns=columns)


def metrics_timeseries(panel: ReturnsPanel, plan: WindowPlan, kind=NetworkKind.EXPLANATORY,
                       method=StatisticMethod.FOREST_IMPORTANCE, q: float = 0.2, n_runs: int = 1,
                       null_samples: int = NetworkDefaults.NULL_SAMPLES, seed: int = 0,
                       forest: Optional[ForestSettings] = None,
                       workers: int = 1) -> Tuple[List[DirectedNetwork], pd.DataFrame]:
    """Infer a network per rolling window and summarize each one."""
    networks = infer_networks(panel, plan, kind, method, q, n_runs, derive_seed(seed, 0), forest, workers)
    table = metrics_table(networks, null_samples, derive_seed(seed, 1), workers)
    logger.info("Computed metrics for %d %s networks", len(networks), NetworkKind(kind).value)
    return networks, table


def write_metrics(table: pd.DataFrame, path: Union[str, Path]):
    frame = table.copy()
    frame["window_end"] = pd.to_datetime(frame["window_end"]).dt.strftime("%Y-%m-%d")
    frame.to_csv(path, index=False, na_rep="")


def _moments(samples: List[float]):
    values = np.array([v for v in samples if not np.isnan(v)])
    if values.size == 0:
        return float("nan"), float("nan")
    sd = float(values.std(ddof=1)) if values.size > 1 else float("nan")
    return float(values.mean()), sd
