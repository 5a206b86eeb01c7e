"""
Walk-forward replay of a forecast path and the portfolio strategies driven by it.
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence

import gymnasium as gym
import numpy as np
import pandas as pd
from gymnasium import spaces

from backtest.ledger import (PERFORMANCE_COLUMNS, POSITION_COLUMNS, BacktestLedger, caveat,
                             forecast_frame)
from backtest.portfolio import solve_mean_variance
from backtest.prediction import Forecast, forecast_path
from backtest.settings import BacktestConfig, CovarianceFilter, ReturnSource, filter_covariance
from errors import DomainError
from learners import ForestSettings
from market.panel import ReturnsPanel

logger = logging.getLogger(__name__)

Policy = Callable[[Forecast], pd.Series]


class WalkForward(gym.Env):
    """
    Gymnasium environment stepping through the decision dates of a forecast path.

    Observation: one-step forecasts for every panel asset (0 where no forecast
    was issued). Action: portfolio weights over the panel assets, held over the
    next period. Reward: the realized portfolio return of that period.
    ``info["forecast"]`` carries the Forecast behind the current observation.
    """

    metadata = {"render_modes": []}

    def __init__(self, panel: ReturnsPanel, forecasts: Sequence[Forecast], max_dates: Optional[int] = None):
        super().__init__()
        self.panel = panel
        self.forecasts = list(forecasts)
        for forecast in self.forecasts:
            if forecast.row + 1 >= panel.n_periods:
                raise DomainError(f"forecast at row {forecast.row} has no realized next period")
        if max_dates is not None and max_dates < 1:
            raise DomainError(f"max_dates must be >= 1, got {max_dates}")
        self.max_dates = max_dates

        # --- Spaces ---
        n_assets = panel.n_assets
        self.observation_space = spaces.Box(-np.inf, np.inf, shape=(n_assets,), dtype=np.float64)
        self.action_space = spaces.Box(-np.inf, np.inf, shape=(n_assets,), dtype=np.float64)

        # --- Internal state ---
        self.cursor = 0
        self.weights = np.zeros(n_assets)
        self.cumulative = 1.0
        self.done = not self.forecasts

    # --- Gym API ---

    def reset(self, *, seed=None, options=None):
        """Rewind to the first decision date with no position held."""
        super().reset(seed=seed)
        self.cursor = 0
        self.weights = np.zeros(self.panel.n_assets)
        self.cumulative = 1.0
        self.done = not self.forecasts
        return self._get_obs(), {"forecast": self._current()}

    def step(self, action):
        """Hold ``action`` over the period after the current decision date."""
        if self.done:
            raise DomainError("walk-forward replay already finished; call reset()")
        weights = np.asarray(action, dtype=float)
        if weights.shape != (self.panel.n_assets,) or not np.isfinite(weights).all():
            raise DomainError(f"action must be {self.panel.n_assets} finite weights, got shape {weights.shape}")
        forecast = self.forecasts[self.cursor]
        self.weights = weights.copy()

        held = np.flatnonzero(self.weights)
        realized = self.panel.values[forecast.row + 1]
        reward = float(self.weights[held] @ realized[held]) if held.size else 0.0
        self.cumulative *= 1.0 + reward

        self.cursor += 1
        terminated = self.cursor >= len(self.forecasts)
        truncated = not terminated and self.max_dates is not None and self.cursor >= self.max_dates
        self.done = terminated or truncated

        info = {
            "date": forecast.date,
            "held": held,
            "weights": self.weights[held],
            "realized": realized[held],
            "cumulative": self.cumulative,
            "forecast": self._current(),
        }
        return self._get_obs(), reward, terminated, truncated, info

    def _current(self) -> Optional[Forecast]:
        if self.done or self.cursor >= len(self.forecasts):
            return None
        return self.forecasts[self.cursor]

    def _get_obs(self) -> np.ndarray:
        forecast = self._current()
        if forecast is None:
            return np.zeros(self.panel.n_assets)
        return forecast.as_series().reindex(self.panel.assets, fill_value=0.0).to_numpy(dtype=float)


def as_action(weights: pd.Series, assets: Sequence[str]) -> np.ndarray:
    """Policy weights as a dense action over ``assets``."""
    unknown = set(weights.index) - set(assets)
    if unknown:
        raise DomainError(f"weights reference assets outside the panel: {sorted(unknown)}")
    return weights.reindex(list(assets), fill_value=0.0).to_numpy(dtype=float)


def long_short(forecast: Forecast) -> pd.Series:
    """Weight sign(prediction) / n on each of the n predicted assets."""
    if forecast.empty:
        return pd.Series(dtype=float)
    return forecast.as_series().apply(np.sign) / len(forecast.assets)


def long_only(forecast: Forecast) -> pd.Series:
    if forecast.empty:
        return pd.Series(dtype=float)
    return pd.Series(1.0 / len(forecast.assets), index=list(forecast.assets))


class MeanVariancePolicy:
    """Mean-variance weights over the predicted assets of each decision date."""

    def __init__(self, panel: ReturnsPanel, config: BacktestConfig, covariance_filter: CovarianceFilter,
                 return_source: ReturnSource):
        self.panel = panel
        self.config = config
        self.covariance_filter = CovarianceFilter(covariance_filter)
        self.return_source = ReturnSource(return_source)
        self.fallback_dates: List[pd.Timestamp] = []

    def __call__(self, forecast: Forecast) -> pd.Series:
        if forecast.empty:
            return pd.Series(dtype=float)
        t = forecast.row
        window = self.panel.slice_rows(t - self.config.t_in + 1, t + 1).select_assets(forecast.assets)
        if self.return_source is ReturnSource.KNOCKOFF_PREDICTION:
            mu = forecast.predicted
        else:
            mu = window.values.mean(axis=0)
        sigma = filter_covariance(window.values, self.covariance_filter)
        solution = solve_mean_variance(mu, sigma, self.config.target_return, self.config.net_leverage)
        if solution.fallback:
            self.fallback_dates.append(forecast.date)
        return pd.Series(solution.weights, index=list(forecast.assets))


def replay(panel: ReturnsPanel, forecasts: Sequence[Forecast], config: BacktestConfig,
           policies: Dict[str, Policy]) -> BacktestLedger:
    """Run each policy over the same forecast path; weights are reset every ``rebalance`` dates."""
    env = WalkForward(panel, forecasts)
    positions, performance = [], []
    for name, policy in policies.items():
        _, info = env.reset()
        k, done = 0, env.done
        while not done:
            forecast = info["forecast"]
            action = as_action(policy(forecast), panel.assets) if k % config.rebalance == 0 else env.weights
            predicted = forecast.as_series()
            _, daily, terminated, truncated, info = env.step(action)
            for j, weight, realized in zip(info["held"], info["weights"], info["realized"]):
                asset = panel.assets[j]
                positions.append({"date": info["date"], "strategy": name, "asset": asset,
                                  "weight": float(weight),
                                  "predicted_return": float(predicted.get(asset, np.nan)),
                                  "realized_return": float(realized)})
            performance.append({"date": info["date"], "strategy": name,
                                "daily_return": daily, "cumulative": info["cumulative"]})
            done = terminated or truncated
            k += 1
        logger.info("Strategy %s: cumulative return %.4f over %d dates", name, env.cumulative - 1.0, k)

    return BacktestLedger(forecasts=forecast_frame(panel, forecasts, config.horizon),
                          positions=pd.DataFrame(positions, columns=POSITION_COLUMNS),
                          performance=pd.DataFrame(performance, columns=PERFORMANCE_COLUMNS),
                          metadata={"caveat": caveat(), "strategies": list(policies)})


def run_equal_weight(panel: ReturnsPanel, config: BacktestConfig, seed: int = 0,
                     forecasts: Optional[Sequence[Forecast]] = None,
                     forest: Optional[ForestSettings] = None, workers: int = 1) -> BacktestLedger:
    """Equally weighted long-short (by predicted sign) and long-only tracks."""
    panel = panel.drop_incomplete()
    if forecasts is None:
        forecasts = forecast_path(panel, config, seed, forest, workers)
    return replay(panel, forecasts, config, {"long_short": long_short, "long_only": long_only})


def run_mean_variance(panel: ReturnsPanel, config: BacktestConfig,
                      covariance_filter: Optional[CovarianceFilter] = None,
                      return_source=ReturnSource.KNOCKOFF_PREDICTION, seed: int = 0,
                      forecasts: Optional[Sequence[Forecast]] = None,
                      forest: Optional[ForestSettings] = None, workers: int = 1) -> BacktestLedger:
    """Mean-variance track with returns from knockoff forecasts or in-sample means."""
    panel = panel.drop_incomplete()
    if forecasts is None:
        forecasts = forecast_path(panel, config, seed, forest, workers)
    policy = MeanVariancePolicy(panel, config, covariance_filter or config.covariance_filter, return_source)
    name = f"mean_variance_{ReturnSource(return_source).value}"
    ledger = replay(panel, forecasts, config, {name: policy})
    if policy.fallback_dates:
        logger.warning("%s: minimum-variance fallback on %d of %d dates", name,
                       len(policy.fallback_dates), len(forecasts))
    ledger.metadata["fallback_dates"] = {name: [d.strftime("%Y-%m-%d") for d in policy.fallback_dates]}
    return ledger
