"""
Backtest parameters and the pluggable covariance filters.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from sklearn.covariance import ledoit_wolf

from config import BacktestDefaults, KnockoffConfig
from errors import DomainError
from knockoffs.moments import shrink_to_diagonal
from selection import StatisticMethod


class CovarianceFilter(str, Enum):
    DIAGONAL_SHRINKAGE = "diagonal_shrinkage"
    LEDOIT_WOLF = "ledoit_wolf"


class ReturnSource(str, Enum):
    KNOCKOFF_PREDICTION = "knockoff_prediction"   # one-step Huber forecasts
    HISTORICAL_MEAN = "historical_mean"           # in-sample average returns


@dataclass(frozen=True)
class BacktestConfig:
    """Walk-forward settings; periods are panel rows."""
    t_in: int = BacktestDefaults.T_IN
    horizon: int = BacktestDefaults.HORIZON
    q: float = BacktestDefaults.Q
    n_runs: int = BacktestDefaults.N_RUNS
    method: StatisticMethod = StatisticMethod(BacktestDefaults.METHOD)
    rebalance: int = BacktestDefaults.REBALANCE
    refit_every: int = BacktestDefaults.REFIT_EVERY
    target_return: float = BacktestDefaults.TARGET_RETURN
    net_leverage: float = BacktestDefaults.NET_LEVERAGE
    covariance_filter: CovarianceFilter = CovarianceFilter(BacktestDefaults.COVARIANCE_FILTER)

    def __post_init__(self):
        object.__setattr__(self, "method", StatisticMethod(self.method))
        object.__setattr__(self, "covariance_filter", CovarianceFilter(self.covariance_filter))
        if self.t_in < 10:
            raise DomainError(f"t_in must be >= 10, got {self.t_in}")
        if self.horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {self.horizon}")
        if not 0.0 < self.q < 1.0:
            raise DomainError(f"q must lie in (0, 1), got {self.q}")
        if self.n_runs < 1 or self.rebalance < 1:
            raise DomainError("n_runs and rebalance must be >= 1")
        if not 1 <= self.refit_every <= self.horizon:
            # a fitted model is never used beyond the forecast horizon
            raise DomainError(f"refit_every must lie in [1, horizon={self.horizon}], got {self.refit_every}")

    @property
    def min_periods(self) -> int:
        return self.t_in + self.horizon


def filter_covariance(returns: np.ndarray, kind=CovarianceFilter.DIAGONAL_SHRINKAGE) -> np.ndarray:
    """Covariance of the columns of ``returns`` after the chosen filter."""
    returns = np.asarray(returns, dtype=float)
    if returns.ndim != 2 or returns.shape[0] < 2:
        raise DomainError("covariance filter needs a T x n matrix with T >= 2")
    kind = CovarianceFilter(kind)
    if kind is CovarianceFilter.LEDOIT_WOLF:
        covariance, _ = ledoit_wolf(returns)
        return covariance
    sample = np.atleast_2d(np.cov(returns, rowvar=False))
    covariance, _ = shrink_to_diagonal(sample, KnockoffConfig.SHRINKAGE_EPSILON)
    return covariance
