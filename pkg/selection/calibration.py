"""
FDR calibration against the synthetic ground truth: realized FDR versus
chosen FDR, plus power.
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import AbstractSet, Optional, Sequence, Union

import numpy as np
import pandas as pd

from config import SelectionDefaults
from errors import DomainError
from learners import ForestSettings
from market.synthetic import SyntheticSpec, generate_synthetic
from selection.statistics import StatisticMethod, knockoff_statistics
from selection.threshold import knockoff_threshold
from utils.parallel import run_tasks
from utils.seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CalibrationReport:
    """Per-level and per-trial FDP and power; rows follow ``q_grid``."""
    q_grid: np.ndarray
    realized_fdp: np.ndarray     # (levels, trials)
    trial_power: np.ndarray      # (levels, trials)
    realized_fdr: np.ndarray     # (levels,)
    power: np.ndarray            # (levels,)

    @property
    def trials(self) -> int:
        return self.realized_fdp.shape[1]

    @property
    def std_error(self) -> np.ndarray:
        """Monte-Carlo standard error of the realized FDR."""
        return self.realized_fdp.std(axis=1, ddof=1) / np.sqrt(self.trials)


def false_discovery_proportion(selected: AbstractSet[int], support: AbstractSet[int]) -> float:
    """FDP of one selection; 0 when nothing is selected."""
    if not selected:
        return 0.0
    return len(set(selected) - set(support)) / len(selected)


def power(selected: AbstractSet[int], support: AbstractSet[int]) -> float:
    """Fraction of the true support recovered; 0 for an empty support."""
    if not support:
        return 0.0
    return len(set(selected) & set(support)) / len(support)


def calibrate_fdr(spec: SyntheticSpec, q_grid: Sequence[float] = SelectionDefaults.Q_GRID,
                  method=StatisticMethod.LASSO_PATH, trials: int = SelectionDefaults.TRIALS,
                  forest: Optional[ForestSettings] = None, workers: int = 1) -> CalibrationReport:
    """
    Run ``trials`` independent synthetic draws (seeded from ``spec.seed``);
    each draw is thresholded at every level of ``q_grid`` from one set of
    knockoff statistics.
    """
    if trials < SelectionDefaults.MIN_TRIALS:
        raise DomainError(f"calibration needs at least {SelectionDefaults.MIN_TRIALS} trials, got {trials}")
    q_grid = np.asarray(q_grid, dtype=float)
    if q_grid.size == 0 or ((q_grid <= 0) | (q_grid >= 1)).any():
        raise DomainError("every FDR level must lie in (0, 1)")

    method = StatisticMethod(method)
    logger.info("Calibrating %s over %d trials at q=%s", method.value, trials, q_grid.tolist())
    tasks = [(spec, q_grid, method, t, forest) for t in range(trials)]
    outcomes = run_tasks(_trial, tasks, workers)

    fdp = np.array([o[0] for o in outcomes]).T
    pw = np.array([o[1] for o in outcomes]).T
    return CalibrationReport(q_grid=q_grid, realized_fdp=fdp, trial_power=pw,
                             realized_fdr=fdp.mean(axis=1), power=pw.mean(axis=1))


def calibration_frame(report: CalibrationReport) -> pd.DataFrame:
    """Long table with columns q, trial, fdp, power."""
    levels, trials = report.realized_fdp.shape
    return pd.DataFrame({
        "q": np.repeat(report.q_grid, trials),
        "trial": np.tile(np.arange(trials), levels),
        "fdp": report.realized_fdp.ravel(),
        "power": report.trial_power.ravel(),
    })


def calibration_summary(report: CalibrationReport) -> pd.DataFrame:
    """Realized-versus-chosen table: one row per level."""
    return pd.DataFrame({
        "q": report.q_grid,
        "realized_fdr": report.realized_fdr,
        "std_error": report.std_error,
        "power": report.power,
    })


def write_calibration(report: CalibrationReport, path: Union[str, Path]):
    calibration_frame(report).to_csv(path, index=False)


def _trial(spec: SyntheticSpec, q_grid: np.ndarray, method: StatisticMethod, trial: int,
           forest: Optional[ForestSettings]):
    draw = replace(spec, seed=derive_seed(spec.seed, trial, 0))
    panel, support = generate_synthetic(draw)
    y, X = panel.values[:, 0], panel.values[:, 1:]
    statistics = knockoff_statistics(y, X, method, seed=derive_seed(spec.seed, trial, 1), forest=forest)
    fdps, powers = [], []
    for q in q_grid:
        _, selected = knockoff_threshold(statistics.W, float(q))
        fdps.append(false_discovery_proportion(selected, support))
        powers.append(power(selected, support))
    return fdps, powers
