"""
Random-forest regression used for impurity-based feature importance.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.ensemble import RandomForestRegressor

from config import ForestConfig
from errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForestSettings:
    """Forest hyper-parameters; mtry=None means ceil(p / 3)."""
    n_trees: int = ForestConfig.N_TREES
    max_depth: Optional[int] = ForestConfig.MAX_DEPTH
    min_leaf: int = ForestConfig.MIN_LEAF
    mtry: Optional[int] = None

    def resolve_mtry(self, n_features: int) -> int:
        if self.mtry is not None:
            return max(1, min(self.mtry, n_features))
        return max(1, math.ceil(n_features * ForestConfig.MTRY_FRACTION))


@dataclass(frozen=True)
class ForestModel:
    """Fitted forest summary: settings actually used and normalized importance."""
    n_trees: int
    max_depth: Optional[int]
    min_leaf: int
    mtry: int
    importance: np.ndarray
    seed: int


def fit_forest(X: np.ndarray, y: np.ndarray, settings: ForestSettings = ForestSettings(),
               seed: int = 0) -> ForestModel:
    """
    Bagged regression trees on bootstrap resamples. Importance is the total
    variance reduction attributed to each feature, normalized to sum to 1
    (all zeros when no split occurred, e.g. for a constant response).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n_samples, n_features = X.shape
    if n_samples < 2 * settings.min_leaf:
        raise DomainError(f"forest needs T >= 2 * min_leaf = {2 * settings.min_leaf}, got {n_samples}")
    mtry = settings.resolve_mtry(n_features)

    if np.ptp(y) == 0.0:
        return ForestModel(settings.n_trees, settings.max_depth, settings.min_leaf, mtry,
                           np.zeros(n_features), int(seed))

    forest = RandomForestRegressor(
        n_estimators=settings.n_trees,
        max_depth=settings.max_depth,
        min_samples_leaf=settings.min_leaf,
        max_features=mtry,
        bootstrap=True,
        random_state=int(seed) % (2 ** 32),
        n_jobs=1,
    )
    forest.fit(X, y)
    importance = np.asarray(forest.feature_importances_, dtype=float)
    return ForestModel(settings.n_trees, settings.max_depth, settings.min_leaf, mtry,
                       importance, int(seed))
