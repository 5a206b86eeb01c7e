"""
LASSO regularization path with warm starts.

Objective at each grid point:  (1 / 2T) ||y - X b||^2 + lambda ||b||_1
scikit-learn's compiled coordinate descent solves the whole grid; any grid
point whose KKT residual still exceeds LassoConfig.KKT_TOLERANCE is then
polished by cyclic coordinate descent on the Gram form.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import lasso_path as sklearn_lasso_path

from config import LassoConfig
from errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LassoPath:
    """Decreasing lambda grid, coefficients per grid point and entry values."""
    lambdas: np.ndarray          # (K,)
    entry_lambda: np.ndarray     # (p,) largest grid lambda with a nonzero coefficient, else 0
    coefficients: np.ndarray     # (K, p)

    @property
    def lambda_max(self) -> float:
        return float(self.lambdas[0])


def lasso_path(X: np.ndarray, y: np.ndarray, grid_size: int = LassoConfig.GRID_SIZE,
               min_ratio: float = LassoConfig.MIN_RATIO) -> LassoPath:
    """Solve the LASSO down a log-spaced grid from lambda_max to lambda_max * min_ratio."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise DomainError("LASSO inputs must be finite")
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise DomainError(f"shape mismatch: X {X.shape}, y {y.shape}")
    if grid_size < 10:
        raise DomainError(f"grid_size must be >= 10, got {grid_size}")

    n_samples, n_features = X.shape
    gram = X.T @ X / n_samples
    corr = X.T @ y / n_samples
    lambda_max = float(np.max(np.abs(corr))) if n_features else 0.0
    anchor = lambda_max if lambda_max > 0.0 else 1.0
    lambdas = np.geomspace(anchor, anchor * min_ratio, grid_size)

    coefficients = np.zeros((grid_size, n_features))
    entry = np.zeros(n_features)
    if n_features == 0 or lambda_max == 0.0:
        # zero is optimal for every lambda
        return LassoPath(lambdas=lambdas, entry_lambda=entry, coefficients=coefficients)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        _, warm, _ = sklearn_lasso_path(X, y, alphas=lambdas, precompute=True, tol=LassoConfig.SOLVER_TOLERANCE,
                                        max_iter=LassoConfig.MAX_ITERATIONS)
    polished = 0
    for k, lam in enumerate(lambdas):
        beta = np.where(np.abs(warm[:, k]) > LassoConfig.ZERO_THRESHOLD, warm[:, k], 0.0)
        if _violation(corr - gram @ beta, beta, lam) > LassoConfig.KKT_TOLERANCE:
            beta = _solve(gram, corr, beta, lam)
            polished += 1
        coefficients[k] = beta
        entering = (entry == 0.0) & (np.abs(beta) > LassoConfig.ZERO_THRESHOLD)
        entry[entering] = lam
    if polished:
        logger.debug("LASSO path: %d of %d grid points polished to the KKT tolerance", polished, grid_size)

    return LassoPath(lambdas=lambdas, entry_lambda=entry, coefficients=coefficients)


def kkt_violation(X: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float) -> float:
    """Largest violation of the subgradient optimality conditions at ``beta``."""
    n_samples = X.shape[0]
    grad = X.T @ (y - X @ beta) / n_samples
    return _violation(grad, beta, lam)


def _violation(grad: np.ndarray, beta: np.ndarray, lam: float) -> float:
    active = beta != 0.0
    inactive_gap = np.abs(grad[~active]) - lam
    active_gap = np.abs(grad[active] - lam * np.sign(beta[active]))
    worst = 0.0
    if inactive_gap.size:
        worst = max(worst, float(inactive_gap.max()))
    if active_gap.size:
        worst = max(worst, float(active_gap.max()))
    return worst


def _solve(gram: np.ndarray, corr: np.ndarray, beta: np.ndarray, lam: float) -> np.ndarray:
    beta = beta.copy()
    diag = np.diag(gram)
    tol = LassoConfig.KKT_TOLERANCE
    everything = np.flatnonzero(diag > 0.0)

    for _ in range(LassoConfig.MAX_SWEEPS):
        grad = corr - gram @ beta
        _sweep(gram, diag, grad, beta, lam, everything)
        # converge on the active set before re-checking all coordinates
        for _ in range(LassoConfig.MAX_SWEEPS):
            active = np.flatnonzero(beta)
            if _sweep(gram, diag, grad, beta, lam, active) <= tol * 1e-2:
                break
        grad = corr - gram @ beta
        if _violation(grad, beta, lam) <= tol:
            return beta
    logger.warning("LASSO did not reach KKT tolerance %.1e at lambda=%.3g", tol, lam)
    return beta


def _sweep(gram, diag, grad, beta, lam, coords) -> float:
    """One cyclic pass; updates grad and beta in place, returns the largest step."""
    largest = 0.0
    for j in coords:
        z = grad[j] + diag[j] * beta[j]
        new = np.sign(z) * max(abs(z) - lam, 0.0) / diag[j]
        delta = new - beta[j]
        if delta != 0.0:
            grad -= gram[:, j] * delta
            beta[j] = new
            largest = max(largest, abs(delta))
    return largest
