"""
Huber M-estimation by iteratively reweighted least squares.
"""

import logging
from dataclasses import dataclass

import numpy as np
import statsmodels.api as sm

from config import HuberConfig
from errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RobustFit:
    """Intercept, slopes, robust residual scale and IRLS iteration count."""
    intercept: float
    coefficients: np.ndarray
    scale: float
    iterations: int
    ridge_applied: bool = False

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.intercept + np.atleast_2d(X) @ self.coefficients


def huber_fit(X: np.ndarray, y: np.ndarray, tuning: float = HuberConfig.TUNING) -> RobustFit:
    """
    Huber regression of y on [1, X] with tuning constant ``tuning`` applied
    to residuals standardized by the MAD scale (1.4826 * MAD).

    An exact fit (zero residual scale) is returned as the least-squares
    solution. Rank-deficient designs get a ridge jitter, flagged in the result.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    n_samples, n_features = X.shape
    if n_features >= n_samples:
        raise DomainError(f"Huber fit needs k < T, got k={n_features}, T={n_samples}")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise DomainError("Huber fit inputs must be finite")

    design = sm.add_constant(X, has_constant="add")
    ridge = np.linalg.matrix_rank(design) < design.shape[1]
    if ridge:
        logger.warning("Rank-deficient Huber design; applying ridge jitter %.0e", HuberConfig.RIDGE_JITTER)
        jitter = np.sqrt(HuberConfig.RIDGE_JITTER) * np.eye(design.shape[1])
        design = np.vstack([design, jitter])
        y = np.concatenate([y, np.zeros(design.shape[1])])

    ols, *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ ols
    exact = 1e-12 * max(1.0, float(np.abs(y).max()))
    if sm.robust.scale.mad(residuals, center=0.0) <= exact:
        # exact fit: no residual to down-weight
        return RobustFit(float(ols[0]), ols[1:], 0.0, 0, ridge)

    model = sm.RLM(y, design, M=sm.robust.norms.HuberT(t=tuning))
    result = model.fit(maxiter=HuberConfig.MAX_ITERATIONS, tol=HuberConfig.TOLERANCE,
                       scale_est="mad", conv="coefs")
    params = np.asarray(result.params, dtype=float)
    iterations = int(result.fit_history["iteration"])
    return RobustFit(float(params[0]), params[1:], float(result.scale), iterations, ridge)
