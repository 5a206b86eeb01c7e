"""
Walk-forward forecasts from prediction networks.

At decision row t the in-sample window is rows t - T_in + 1 .. t. A
prediction network is inferred on it, and every asset i with a nonempty
predictor set P_i gets a Huber fit of r_{i,s+1} on r_{P_i,s} inside the
window. The forecast of r_{i,t+1} applies that fit to r_{P_i,t}; nothing
after row t is read.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from backtest.settings import BacktestConfig
from errors import DomainError
from learners import ForestSettings, RobustFit, huber_fit
from market.panel import ReturnsPanel
from networks import DirectedNetwork, NetworkKind, infer_network
from utils.seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Forecast:
    """One-step forecasts issued at the close of ``date`` (panel row ``row``)."""
    date: pd.Timestamp
    row: int
    fitted_at: int
    assets: Tuple[str, ...]
    k_in: np.ndarray
    predicted: np.ndarray
    predictors: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return not self.assets

    def as_series(self) -> pd.Series:
        return pd.Series(self.predicted, index=list(self.assets), dtype=float)


@dataclass(frozen=True)
class PredictorModel:
    """Prediction network and per-asset robust fits from one in-sample window."""
    fitted_at: int
    network: DirectedNetwork
    fits: Dict[str, Tuple[Tuple[str, ...], RobustFit]]

    def forecast(self, panel: ReturnsPanel, t: int) -> Forecast:
        if t < self.fitted_at:
            raise DomainError(f"model fitted at row {self.fitted_at} cannot forecast from row {t}")
        assets = tuple(a for a in panel.assets if a in self.fits)
        predicted, k_in = [], []
        for asset in assets:
            sources, fit = self.fits[asset]
            latest = panel.values[t, [panel.index_of(s) for s in sources]]
            predicted.append(float(fit.predict(latest)[0]))
            k_in.append(len(sources))
        return Forecast(date=panel.dates[t], row=t, fitted_at=self.fitted_at, assets=assets,
                        k_in=np.array(k_in, dtype=int), predicted=np.array(predicted),
                        predictors={a: self.fits[a][0] for a in assets})


def fit_predictors(panel: ReturnsPanel, t: int, config: BacktestConfig, seed: int = 0,
                   forest: Optional[ForestSettings] = None, workers: int = 1) -> PredictorModel:
    """Infer the prediction network on the window ending at row t and fit every target."""
    if not config.t_in - 1 <= t < panel.n_periods:
        raise DomainError(f"decision row {t} needs {config.t_in} in-sample rows inside a "
                          f"{panel.n_periods}-row panel")
    window = panel.slice_rows(t - config.t_in + 1, t + 1)
    network = infer_network(window, NetworkKind.PREDICTION, config.method, config.q,
                            config.n_runs, seed, forest, workers)
    fits = {}
    for asset in network.nodes:
        sources = network.predictors(asset)
        if not sources:
            continue
        y = window.column(asset)[1:]
        X = window.select_assets(sources).values[:-1]
        if len(sources) >= len(y):
            logger.warning("Skipping %s: %d predictors for %d in-sample pairs", asset, len(sources), len(y))
            continue
        fits[asset] = (sources, huber_fit(X, y))
    return PredictorModel(fitted_at=t, network=network, fits=fits)


def predict(panel: ReturnsPanel, t: int, config: BacktestConfig, seed: int = 0,
            forest: Optional[ForestSettings] = None, workers: int = 1) -> Forecast:
    """Forecast r_{t+1} for every asset with a nonempty predictor set."""
    return fit_predictors(panel, t, config, seed, forest, workers).forecast(panel, t)


def decision_rows(panel: ReturnsPanel, config: BacktestConfig) -> range:
    """Rows at which positions are set; each has ``horizon`` realized rows after it."""
    if panel.n_periods < config.min_periods:
        raise DomainError(f"backtest needs >= {config.min_periods} periods (t_in + horizon), "
                          f"got {panel.n_periods}")
    return range(config.t_in - 1, panel.n_periods - config.horizon)


def forecast_path(panel: ReturnsPanel, config: BacktestConfig, seed: int = 0,
                  forest: Optional[ForestSettings] = None, workers: int = 1) -> List[Forecast]:
    """
    Forecasts for every decision row. Models are refit every ``refit_every``
    rows with seed derive_seed(seed, row) and applied to the latest returns in
    between.
    """
    panel = panel.drop_incomplete()
    rows = decision_rows(panel, config)
    forecasts, model = [], None
    for k, t in enumerate(rows):
        if k % config.refit_every == 0:
            model = fit_predictors(panel, t, config, derive_seed(seed, t), forest, workers)
        forecast = model.forecast(panel, t)
        logger.debug("%s: %d assets predicted", forecast.date.date(), len(forecast.assets))
        forecasts.append(forecast)
    logger.info("Forecast path: %d decision dates, %d forecasts", len(forecasts),
                sum(len(f.assets) for f in forecasts))
    return forecasts
