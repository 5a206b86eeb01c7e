"""
Knockoff statistics: fit a learner on [X, X~] and contrast each factor's
quality Z_j with its knockoff's quality Z~_j.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from config import LassoConfig
from knockoffs import estimate_moments, sample_knockoffs, solve_s_equi, standardize
from learners import ForestSettings, fit_forest, lasso_path
from utils.seeding import derive_seed, rng

logger = logging.getLogger(__name__)


class StatisticMethod(str, Enum):
    LASSO_PATH = "lasso_path"
    FOREST_IMPORTANCE = "forest_importance"


@dataclass(frozen=True)
class KnockoffStatistics:
    Z: np.ndarray
    Z_tilde: np.ndarray
    W: np.ndarray
    method: StatisticMethod


def combine(Z: np.ndarray, Z_tilde: np.ndarray, method) -> KnockoffStatistics:
    """
    W_j = Z_j - Z~_j for forest importance,
    W_j = max(Z_j, Z~_j) * sign(Z_j - Z~_j) for LASSO entry values.
    """
    method = StatisticMethod(method)
    Z = np.asarray(Z, dtype=float)
    Z_tilde = np.asarray(Z_tilde, dtype=float)
    if method is StatisticMethod.FOREST_IMPORTANCE:
        W = Z - Z_tilde
    else:
        W = np.maximum(Z, Z_tilde) * np.sign(Z - Z_tilde)
    return KnockoffStatistics(Z=Z, Z_tilde=Z_tilde, W=W, method=method)


def knockoff_statistics(y: np.ndarray, X: np.ndarray, method=StatisticMethod.LASSO_PATH,
                        seed: int = 0, forest: Optional[ForestSettings] = None,
                        names: Optional[Sequence[str]] = None,
                        swap: Optional[Sequence[int]] = None) -> KnockoffStatistics:
    """
    Standardize one calibration window, draw second-order knockoffs, fit the
    learner on the column-shuffled augmented matrix and unshuffle the scores.
    Factors listed in ``swap`` trade places with their knockoffs before the
    fit, which flips the sign of their W under the same seed.
    """
    method = StatisticMethod(method)
    X_std, _, _ = standardize(X, names)
    response = np.asarray(y, dtype=float)
    response = response - response.mean()
    spread = response.std()
    if spread > 0.0:
        response = response / spread

    moments = estimate_moments(X_std, names)
    s = solve_s_equi(moments.covariance)
    sample = sample_knockoffs(X_std, moments, s, derive_seed(seed, 0))

    n_features = X_std.shape[1]
    originals, knockoffs = X_std, sample.knockoffs
    if swap is not None and len(swap):
        idx = np.asarray(swap, dtype=int)
        originals, knockoffs = originals.copy(), knockoffs.copy()
        originals[:, idx], knockoffs[:, idx] = sample.knockoffs[:, idx], X_std[:, idx]
    augmented, _, _ = standardize(np.hstack([originals, knockoffs]))
    # learners see the augmented columns in a seeded random order
    order = rng(derive_seed(seed, 1)).permutation(2 * n_features)
    shuffled = _scores(augmented[:, order], response, method, forest, derive_seed(seed, 2))
    scores = np.empty(2 * n_features)
    scores[order] = shuffled
    return combine(scores[:n_features], scores[n_features:], method)


def _scores(X: np.ndarray, y: np.ndarray, method: StatisticMethod,
            forest: Optional[ForestSettings], seed: int) -> np.ndarray:
    if method is StatisticMethod.FOREST_IMPORTANCE:
        return fit_forest(X, y, forest or ForestSettings(), seed=seed).importance
    return lasso_path(X, y, grid_size=LassoConfig.GRID_SIZE).entry_lambda
