"""
Fund replication: which assets explain a fund's returns, window by window.
"""

import logging
from typing import Mapping, Optional

import numpy as np
import pandas as pd

from errors import DomainError
from learners import ForestSettings
from market.panel import ReturnsPanel
from market.windows import WindowPlan, windows
from selection.filter import bootstrap_select
from selection.statistics import StatisticMethod
from utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def replicate(panel: ReturnsPanel, target: str, plan: WindowPlan, subset_size: int,
              n_bootstraps: int, method=StatisticMethod.LASSO_PATH, q: float = 0.2,
              seed: int = 0, forest: Optional[ForestSettings] = None,
              workers: int = 1) -> pd.DataFrame:
    """
    Bootstrap selection of the assets explaining ``target`` in every window.
    Returns one row per (window_end, asset) with the selection frequency
    (count / n_bootstraps) and the raw count.
    """
    rows = []
    for w, view in enumerate(windows(panel, plan)):
        if target not in view.assets:
            logger.warning("Target %s has missing values in window ending %s; skipped",
                           target, view.dates[-1].date())
            continue
        candidates = view.without(target)
        size = min(subset_size, candidates.n_assets)
        counts = bootstrap_select(view.column(target), candidates, size, n_bootstraps,
                                  method, q, derive_seed(seed, w), forest, workers)
        end = view.dates[-1].strftime("%Y-%m-%d")
        logger.info("Window ending %s: %d assets selected at least once", end, int((counts > 0).sum()))
        for asset, count in counts.items():
            rows.append({"window_end": end, "asset": asset,
                         "frequency": count / n_bootstraps, "count": int(count)})
    return pd.DataFrame(rows, columns=["window_end", "asset", "frequency", "count"])


def sector_fdp(counts: pd.Series, sectors: Mapping[str, str], target_sector: str) -> float:
    """Share of selections falling outside ``target_sector`` (0 when nothing was selected)."""
    total = counts.sum()
    if total == 0:
        return 0.0
    outside = np.array([sectors.get(a) != target_sector for a in counts.index])
    return float(counts[outside].sum() / total)


def replication_fdr(table: pd.DataFrame, sectors: Mapping[str, str], target_sector: str) -> pd.DataFrame:
    """Realized FDR of each window of a ``replicate`` table, measured by sector membership."""
    if table.empty:
        raise DomainError("replication table is empty")
    rows = []
    for end, group in table.groupby("window_end", sort=True):
        counts = group.set_index("asset")["count"]
        rows.append({"window_end": end, "realized_fdr": sector_fdp(counts, sectors, target_sector),
                     "selections": int(counts.sum())})
    return pd.DataFrame(rows)
