"""
Per-node knockoff inference of explanatory and prediction networks.

For every node i the returns of i are the response and all other assets
are candidate factors: contemporaneous for explanatory networks, lagged by
one period for prediction networks.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from config import NetworkDefaults
from errors import DomainError
from learners import ForestSettings
from market.panel import ReturnsPanel
from market.windows import WindowPlan, windows
from networks.graph import DirectedNetwork, NetworkKind
from selection import StatisticMethod, select_stabilized
from utils.parallel import run_tasks
from utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def infer_network(window: ReturnsPanel, kind=NetworkKind.EXPLANATORY, method=StatisticMethod.FOREST_IMPORTANCE,
                  q: float = 0.2, n_runs: int = 1, seed: int = 0, forest: Optional[ForestSettings] = None,
                  workers: int = 1) -> DirectedNetwork:
    """Infer one network on one calibration window."""
    return infer_windows([window], kind, method, q, n_runs, [seed], forest, workers)[0]


def infer_networks(panel: ReturnsPanel, plan: WindowPlan, kind=NetworkKind.EXPLANATORY,
                   method=StatisticMethod.FOREST_IMPORTANCE, q: float = 0.2, n_runs: int = 1,
                   seed: int = 0, forest: Optional[ForestSettings] = None,
                   workers: int = 1) -> List[DirectedNetwork]:
    """One network per rolling window; window w is seeded derive_seed(seed, w)."""
    views = windows(panel, plan)
    seeds = [derive_seed(seed, w) for w in range(len(views))]
    return infer_windows(views, kind, method, q, n_runs, seeds, forest, workers)


def infer_windows(views: Sequence[ReturnsPanel], kind, method, q: float, n_runs: int,
                  seeds: Sequence[int], forest: Optional[ForestSettings],
                  workers: int) -> List[DirectedNetwork]:
    """Fan out every (window, node) pair to the worker pool and assemble the graphs."""
    kind = NetworkKind(kind)
    method = StatisticMethod(method)
    minimum = 2 if kind is NetworkKind.EXPLANATORY else 2 + NetworkDefaults.PREDICTION_LAG
    prepared, tasks = [], []
    for w, view in enumerate(views):
        if view.n_periods < minimum:
            raise DomainError(f"{kind.value} network needs windows of >= {minimum} periods, "
                              f"got {view.n_periods}")
        view = _drop_constant(view)
        prepared.append(view)
        if view.n_assets < 2:
            continue
        for i in range(view.n_assets):
            tasks.append((w, i, view.values, kind, method, q, n_runs, derive_seed(seeds[w], i), forest))

    edges = [set() for _ in prepared]
    for w, i, sources in run_tasks(_node_task, tasks, workers):
        assets = prepared[w].assets
        edges[w].update((assets[j], assets[i]) for j in sources)

    networks = []
    for view, found in zip(prepared, edges):
        net = DirectedNetwork(nodes=view.assets, edges=frozenset(found), window_end=view.dates[-1],
                              kind=kind, q=q, sectors=view.sector)
        logger.info("%s network ending %s: %d nodes, %d edges", kind.value.capitalize(),
                    view.dates[-1].date(), net.n_nodes, net.n_edges)
        networks.append(net)
    return networks


def _node_task(w, i, values, kind, method, q, n_runs, seed, forest):
    others = np.array([k for k in range(values.shape[1]) if k != i])
    if kind is NetworkKind.EXPLANATORY:
        y, X = values[:, i], values[:, others]
    else:
        lag = NetworkDefaults.PREDICTION_LAG
        y, X = values[lag:, i], values[:-lag, others]
    selected = select_stabilized(y, X, method, q, n_runs, seed, forest)
    return w, i, others[sorted(selected)].tolist()


def _drop_constant(view: ReturnsPanel) -> ReturnsPanel:
    flat = ~(view.values.std(axis=0) > 0)
    if not flat.any():
        return view
    dropped = [a for a, f in zip(view.assets, flat) if f]
    logger.warning("Dropping %d zero-variance assets from window ending %s: %s",
                   len(dropped), view.dates[-1].date(), dropped[:10])
    return view.select_assets(a for a, f in zip(view.assets, flat) if not f)
