"""
Backtest ledger: forecasts, positions and compounded performance per strategy.

Rows are keyed by the decision date: weights set at the close of ``date``
earn the return of the following period.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Union

import numpy as np
import pandas as pd

from backtest.prediction import Forecast
from config import BacktestDefaults
from errors import DomainError
from market.panel import ReturnsPanel

PathLike = Union[str, Path]

FORECAST_COLUMNS = ["date", "asset", "k_in", "predicted_return", "predicted_horizon", "realized_horizon"]
POSITION_COLUMNS = ["date", "strategy", "asset", "weight", "predicted_return", "realized_return"]
PERFORMANCE_COLUMNS = ["date", "strategy", "daily_return", "cumulative"]
SUMMARY_COLUMNS = ["strategy", "cumulative_return", "hit_ratio", "n_days"]


@dataclass
class BacktestLedger:
    forecasts: pd.DataFrame
    positions: pd.DataFrame
    performance: pd.DataFrame
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def strategies(self) -> List[str]:
        return list(dict.fromkeys(self.performance["strategy"]))

    def track(self, strategy: str) -> pd.Series:
        """Cumulative performance of one strategy, indexed by date."""
        rows = self.performance[self.performance["strategy"] == strategy]
        return rows.set_index("date")["cumulative"]

    def merge(self, other: "BacktestLedger") -> "BacktestLedger":
        """Combine strategies run on the same forecast path."""
        clash = set(self.strategies) & set(other.strategies)
        if clash:
            raise DomainError(f"strategies present in both ledgers: {sorted(clash)}")
        metadata = {**self.metadata, **other.metadata}
        for key, value in other.metadata.items():
            mine = self.metadata.get(key)
            if isinstance(mine, dict) and isinstance(value, dict):
                metadata[key] = {**mine, **value}
        metadata["strategies"] = self.strategies + other.strategies
        return BacktestLedger(forecasts=self.forecasts,
                              positions=pd.concat([self.positions, other.positions], ignore_index=True),
                              performance=pd.concat([self.performance, other.performance], ignore_index=True),
                              metadata=metadata)


def forecast_frame(panel: ReturnsPanel, forecasts: Iterable[Forecast], horizon: int) -> pd.DataFrame:
    """
    One row per (date, predicted asset). The predicted horizon return is
    horizon x the one-step forecast; the realized one compounds rows
    t+1 .. t+horizon.
    """
    rows = []
    for forecast in forecasts:
        t = forecast.row
        for asset, k_in, predicted in zip(forecast.assets, forecast.k_in, forecast.predicted):
            future = panel.column(asset)[t + 1:t + 1 + horizon]
            rows.append({"date": forecast.date, "asset": asset, "k_in": int(k_in),
                         "predicted_return": float(predicted),
                         "predicted_horizon": horizon * float(predicted),
                         "realized_horizon": float(np.prod(1.0 + future) - 1.0)})
    return pd.DataFrame(rows, columns=FORECAST_COLUMNS)


def hit_ratio_by_kin(ledger: BacktestLedger) -> pd.DataFrame:
    """Sign hit ratio of horizon forecasts grouped by in-degree; zero realized return is a miss."""
    frame = ledger.forecasts
    if frame.empty:
        raise DomainError("ledger has no forecasts")
    realized = frame["realized_horizon"].to_numpy()
    hit = (np.sign(frame["predicted_horizon"].to_numpy()) == np.sign(realized)) & (realized != 0.0)
    grouped = pd.Series(hit.astype(float), name="hit").groupby(frame["k_in"].to_numpy())
    table = grouped.agg(["mean", "sem", "count"]).rename(
        columns={"mean": "hit_ratio", "sem": "std_error", "count": "n"})
    table.index.name = "k_in"
    return table.reset_index()


def summarize(ledger: BacktestLedger) -> pd.DataFrame:
    """
    Per strategy: final compounded return, share of nonzero positions whose
    sign matched the next realized return, and number of decision dates.
    """
    rows = []
    for strategy in ledger.strategies:
        perf = ledger.performance[ledger.performance["strategy"] == strategy]
        held = ledger.positions[(ledger.positions["strategy"] == strategy) & (ledger.positions["weight"] != 0)]
        realized = held["realized_return"].to_numpy()
        hits = (np.sign(held["weight"].to_numpy()) == np.sign(realized)) & (realized != 0.0)
        rows.append({"strategy": strategy,
                     "cumulative_return": float(perf["cumulative"].iloc[-1] - 1.0) if len(perf) else 0.0,
                     "hit_ratio": float(hits.mean()) if hits.size else float("nan"),
                     "n_days": int(len(perf))})
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def caveat() -> str:
    return BacktestDefaults.CAVEAT


def write_ledger(ledger: BacktestLedger, path: PathLike):
    """Positions CSV: date,strategy,asset,weight,predicted_return,realized_return."""
    _dated(ledger.positions[POSITION_COLUMNS]).to_csv(path, index=False, na_rep="")


def write_forecasts(ledger: BacktestLedger, path: PathLike):
    _dated(ledger.forecasts[FORECAST_COLUMNS]).to_csv(path, index=False, na_rep="")


def write_performance(ledger: BacktestLedger, path: PathLike):
    _dated(ledger.performance[PERFORMANCE_COLUMNS]).to_csv(path, index=False, na_rep="")


def write_summary(table: pd.DataFrame, path: PathLike):
    table[SUMMARY_COLUMNS].to_csv(path, index=False, na_rep="")


def _dated(frame: pd.DataFrame) -> pd.DataFrame:
    frame = frame.copy()
    frame["date"] = pd.to_datetime(frame["date"]).dt.strftime("%Y-%m-%d")
    return frame
