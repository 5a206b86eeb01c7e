"""
FDR-controlled factor selection: single runs, stabilized unions of runs
and column bootstraps for wide candidate sets.
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, Optional, Sequence

import numpy as np
import pandas as pd

from errors import DomainError
from learners import ForestSettings
from market.panel import ReturnsPanel
from selection.statistics import KnockoffStatistics, StatisticMethod, knockoff_statistics
from selection.threshold import knockoff_threshold
from utils.parallel import run_tasks
from utils.seeding import derive_seed, rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SelectionResult:
    """Statistics, threshold and selected candidate indices of one knockoff run."""
    statistics: KnockoffStatistics
    q: float
    threshold: float
    selected: FrozenSet[int]
    empty: bool


def select_once(y: np.ndarray, X: np.ndarray, method=StatisticMethod.LASSO_PATH, q: float = 0.2,
                seed: int = 0, forest: Optional[ForestSettings] = None,
                names: Optional[Sequence[str]] = None) -> SelectionResult:
    """One knockoff draw, one learner fit, one knockoff+ threshold."""
    statistics = knockoff_statistics(y, X, method, seed=seed, forest=forest, names=names)
    tau, selected = knockoff_threshold(statistics.W, q)
    return SelectionResult(statistics=statistics, q=q, threshold=tau,
                           selected=selected, empty=not selected)


def select_stabilized(y: np.ndarray, X: np.ndarray, method=StatisticMethod.LASSO_PATH, q: float = 0.2,
                      n_runs: int = 1, seed: int = 0, forest: Optional[ForestSettings] = None,
                      names: Optional[Sequence[str]] = None) -> FrozenSet[int]:
    """Union of the selections of ``n_runs`` runs seeded derive_seed(seed, run)."""
    if n_runs < 1:
        raise DomainError(f"n_runs must be >= 1, got {n_runs}")
    union = set()
    empty_runs = 0
    for run in range(n_runs):
        result = select_once(y, X, method, q, derive_seed(seed, run), forest, names)
        union |= result.selected
        empty_runs += result.empty
    logger.debug("Stabilized selection: %d factors, %d/%d empty runs", len(union), empty_runs, n_runs)
    return frozenset(union)


def bootstrap_select(y: np.ndarray, panel: ReturnsPanel, subset_size: int, n_bootstraps: int,
                     method=StatisticMethod.LASSO_PATH, q: float = 0.2, seed: int = 0,
                     forest: Optional[ForestSettings] = None, workers: int = 1) -> pd.Series:
    """
    Selection counts per candidate asset over ``n_bootstraps`` knockoff runs,
    each on a uniformly drawn subset of ``subset_size`` columns (without
    replacement within a bootstrap).
    """
    if subset_size > panel.n_assets:
        raise DomainError(f"subset_size {subset_size} exceeds the {panel.n_assets} candidates")
    if subset_size < 1 or n_bootstraps < 1:
        raise DomainError("subset_size and n_bootstraps must be >= 1")

    tasks = [(y, panel.values, panel.assets, subset_size, method, q, seed, b, forest)
             for b in range(n_bootstraps)]
    counts = np.zeros(panel.n_assets, dtype=int)
    for picked in run_tasks(_bootstrap_task, tasks, workers):
        counts[picked] += 1
    return pd.Series(counts, index=list(panel.assets), name="count")


def _bootstrap_task(y, values, assets, subset_size, method, q, seed, b, forest) -> np.ndarray:
    columns = np.sort(rng(derive_seed(seed, b, 0)).choice(values.shape[1], size=subset_size, replace=False))
    names = [assets[c] for c in columns]
    result = select_once(y, values[:, columns], method, q, derive_seed(seed, b, 1), forest, names)
    return columns[sorted(result.selected)]
