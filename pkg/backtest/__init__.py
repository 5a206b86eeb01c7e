"""
Backtest package - walk-forward forecasts from prediction networks, hit ratios
and the equal-weight / mean-variance strategies.
"""

from backtest.settings import BacktestConfig, CovarianceFilter, ReturnSource, filter_covariance
from backtest.portfolio import MeanVarianceSolution, solve_mean_variance
from backtest.prediction import Forecast, PredictorModel, decision_rows, fit_predictors, forecast_path, predict
from backtest.ledger import (BacktestLedger, forecast_frame, hit_ratio_by_kin, summarize, write_forecasts,
                             write_ledger, write_performance, write_summary)
from backtest.walkforward import (MeanVariancePolicy, WalkForward, as_action, long_only, long_short, replay,
                                  run_equal_weight, run_mean_variance)

__all__ = [
    'BacktestConfig', 'CovarianceFilter', 'ReturnSource', 'filter_covariance',
    'MeanVarianceSolution', 'solve_mean_variance',
    'Forecast', 'PredictorModel', 'decision_rows', 'fit_predictors', 'forecast_path', 'predict',
    'BacktestLedger', 'forecast_frame', 'hit_ratio_by_kin', 'summarize', 'write_forecasts',
    'write_ledger', 'write_performance', 'write_summary',
    'MeanVariancePolicy', 'WalkForward', 'as_action', 'long_only', 'long_short', 'replay',
    'run_equal_weight', 'run_mean_variance',
]
