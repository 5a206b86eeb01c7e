"""Knockoff selection package: statistics, threshold, selection and calibration."""

from selection.statistics import KnockoffStatistics, StatisticMethod, combine, knockoff_statistics
from selection.threshold import knockoff_threshold
from selection.filter import SelectionResult, bootstrap_select, select_once, select_stabilized
from selection.calibration import (
    CalibrationReport, calibrate_fdr, calibration_frame, calibration_summary,
    false_discovery_proportion, power, write_calibration,
)
from selection.replication import replicate, replication_fdr, sector_fdp

__all__ = [
    'KnockoffStatistics', 'StatisticMethod', 'combine', 'knockoff_statistics',
    'knockoff_threshold',
    'SelectionResult', 'bootstrap_select', 'select_once', 'select_stabilized',
    'CalibrationReport', 'calibrate_fdr', 'calibration_frame', 'calibration_summary',
    'false_discovery_proportion', 'power', 'write_calibration',
    'replicate', 'replication_fdr', 'sector_fdp',
]
