"""
First and second moment estimation for knockoff construction.
Contains no sampling code - only standardization and covariance shrinkage.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from config import KnockoffConfig
from errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MomentEstimate:
    """Sample mean and diagonally shrunk sample covariance."""
    mean: np.ndarray
    covariance: np.ndarray
    shrinkage_used: float


def standardize(X: np.ndarray, names: Optional[Sequence[str]] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Z-score every column (population standard deviation).
    Returns the standardized matrix, the column means and the column scales.
    """
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    _check_constant(scale, names)
    return (X - mean) / scale, mean, scale


def estimate_moments(X: np.ndarray, names: Optional[Sequence[str]] = None,
                     epsilon: float = KnockoffConfig.SHRINKAGE_EPSILON) -> MomentEstimate:
    """
    Sample mean and covariance, the covariance shrunk toward its diagonal by
    the smallest gamma in [0, 1] with lambda_min >= epsilon * trace / N.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 1:
        raise DomainError(f"moment estimation needs T >= 2 rows and N >= 1 columns, got {X.shape}")
    if not np.isfinite(X).all():
        raise DomainError("moment estimation needs finite inputs")

    mean = X.mean(axis=0)
    sample = np.atleast_2d(np.cov(X, rowvar=False))
    _check_constant(np.sqrt(np.diag(sample)), names)

    covariance, gamma = shrink_to_diagonal(sample, epsilon)
    return MomentEstimate(mean=mean, covariance=covariance, shrinkage_used=gamma)


def shrink_to_diagonal(sample: np.ndarray, epsilon: float = KnockoffConfig.SHRINKAGE_EPSILON) -> Tuple[np.ndarray, float]:
    """Return ((1 - gamma) S + gamma diag(S), gamma) for the smallest admissible gamma."""
    sample = (sample + sample.T) / 2.0
    target = np.diag(np.diag(sample))
    floor = epsilon * np.trace(sample) / sample.shape[0]

    def margin(gamma: float) -> float:
        blended = (1.0 - gamma) * sample + gamma * target
        return np.linalg.eigvalsh(blended)[0] - floor

    if margin(0.0) >= 0.0:
        return sample, 0.0
    if margin(1.0) < 0.0:
        # variances too heterogeneous for the floor; the diagonal is still SPD
        logger.warning("Diagonal shrinkage saturated at gamma=1 (variance ratio above 1/epsilon)")
        return target, 1.0
    # lambda_min is concave in gamma, so there is a single crossing in (0, 1]
    gamma = brentq(margin, 0.0, 1.0, xtol=1e-12)
    # brentq can land a hair short of the crossing
    while margin(gamma) < 0.0:
        gamma = min(1.0, gamma + 1e-12)
    logger.debug("Covariance shrinkage activated: gamma=%.3g", gamma)
    return (1.0 - gamma) * sample + gamma * target, float(gamma)


def _check_constant(scale: np.ndarray, names: Optional[Sequence[str]]):
    constant = np.flatnonzero(~(scale > 0))
    if constant.size:
        j = int(constant[0])
        label = names[j] if names is not None else f"column {j}"
        raise DomainError(f"{label} has zero variance")
