"""
Closed-form mean-variance weights under a return target and a net-leverage constraint.

    minimize    w' S w
    subject to  w' mu = target,  1' w = leverage

With A = 1'S^-1 1, B = 1'S^-1 mu, C = mu'S^-1 mu and D = AC - B^2 the solution is
    w = [(C L - B m) S^-1 1 + (A m - B L) S^-1 mu] / D.
When D vanishes (mu proportional to 1, or a single asset) the return target
cannot be imposed independently and the minimum-variance portfolio with only
the leverage constraint is returned instead. It is flagged as a fallback only
when its return misses the target.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from config import BacktestDefaults
from errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeanVarianceSolution:
    weights: np.ndarray
    fallback: bool    # True when only the leverage constraint could be met

    def residuals(self, mu: np.ndarray, target_return: float, net_leverage: float):
        """(return residual, leverage residual)."""
        return float(self.weights @ mu - target_return), float(self.weights.sum() - net_leverage)


def solve_mean_variance(mu: np.ndarray, sigma: np.ndarray,
                        target_return: float = BacktestDefaults.TARGET_RETURN,
                        net_leverage: float = BacktestDefaults.NET_LEVERAGE) -> MeanVarianceSolution:
    mu = np.asarray(mu, dtype=float).ravel()
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    n = mu.size
    if n == 0:
        raise DomainError("mean-variance needs at least one asset")
    if sigma.shape != (n, n):
        raise DomainError(f"covariance has shape {sigma.shape}, expected ({n}, {n})")
    if not (np.isfinite(mu).all() and np.isfinite(sigma).all()):
        raise DomainError("mean-variance inputs must be finite")

    if n == 1:
        fallback = not np.isclose(mu[0] * net_leverage, target_return, rtol=0.0,
                                  atol=BacktestDefaults.CONSTRAINT_TOLERANCE)
        return MeanVarianceSolution(np.array([net_leverage]), fallback)

    try:
        factor = cho_factor(sigma)
    except LinAlgError:
        raise DomainError("filtered covariance is not positive definite") from None
    ones = np.ones(n)
    inv_one = cho_solve(factor, ones)
    inv_mu = cho_solve(factor, mu)
    A, B, C = ones @ inv_one, ones @ inv_mu, mu @ inv_mu
    D = A * C - B * B

    if D <= BacktestDefaults.DEGENERACY_TOLERANCE * A * C or C == 0.0:
        # mu is constant: every fully invested portfolio earns L * B / A
        weights = net_leverage * inv_one / A
        attained = abs(weights @ mu - target_return) <= BacktestDefaults.CONSTRAINT_TOLERANCE
        if not attained:
            logger.debug("Return target not attainable independently of leverage; using minimum variance")
        return MeanVarianceSolution(weights, fallback=not attained)

    m, L = target_return, net_leverage
    weights = ((C * L - B * m) * inv_one + (A * m - B * L) * inv_mu) / D
    return MeanVarianceSolution(weights, fallback=False)
