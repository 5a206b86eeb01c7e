"""
Returns panel: a T x N matrix of simple returns with date and asset labels.
Contains no modelling code - only ingestion, validation and slicing.
"""

import csv
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from errors import DomainError, FormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class PanelFormat(str, Enum):
    """Supported on-disk panel layouts."""
    CSV = "csv"              # date,<asset1>,<asset2>,...
    LONG_CSV = "long_csv"    # date,asset,return


@dataclass(frozen=True)
class ReturnsPanel:
    """Immutable returns panel. Missing observations are stored as NaN."""
    dates: pd.DatetimeIndex
    assets: Tuple[str, ...]
    values: np.ndarray
    sector: Optional[Mapping[str, str]] = field(default=None)

    def __post_init__(self):
        dates = pd.DatetimeIndex(self.dates)
        assets = tuple(str(a) for a in self.assets)
        values = np.asarray(self.values, dtype=float)
        # slices of a frozen panel stay views; anything writable is copied
        if values.flags.writeable:
            values = values.copy()
        if values.ndim != 2:
            raise DomainError(f"panel values must be a matrix, got {values.ndim} dimensions")
        if values.shape != (len(dates), len(assets)):
            raise DomainError(f"panel values have shape {values.shape}, "
                              f"expected ({len(dates)}, {len(assets)})")
        if not (dates.is_monotonic_increasing and dates.is_unique):
            raise DomainError("panel dates must be strictly increasing")
        if len(set(assets)) != len(assets):
            raise DomainError("panel contains duplicate asset identifiers")
        if np.isinf(values).any():
            raise DomainError("panel contains infinite returns")
        values.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "assets", assets)
        object.__setattr__(self, "values", values)
        if self.sector is not None:
            object.__setattr__(self, "sector", dict(self.sector))

    @property
    def n_periods(self) -> int:
        return self.values.shape[0]

    @property
    def n_assets(self) -> int:
        return self.values.shape[1]

    def index_of(self, asset: str) -> int:
        try:
            return self.assets.index(asset)
        except ValueError:
            raise DomainError(f"unknown asset '{asset}'") from None

    def column(self, asset: str) -> np.ndarray:
        return self.values[:, self.index_of(asset)]

    def is_complete(self) -> np.ndarray:
        """Boolean mask of assets without any missing value."""
        return ~np.isnan(self.values).any(axis=0)

    def select_assets(self, assets: Iterable[str]) -> "ReturnsPanel":
        assets = list(assets)
        idx = [self.index_of(a) for a in assets]
        return ReturnsPanel(self.dates, tuple(assets), self.values[:, idx], self._sector_for(assets))

    def without(self, asset: str) -> "ReturnsPanel":
        return self.select_assets(a for a in self.assets if a != asset)

    def slice_rows(self, start: int, stop: int) -> "ReturnsPanel":
        return ReturnsPanel(self.dates[start:stop], self.assets, self.values[start:stop], self.sector)

    def drop_incomplete(self) -> "ReturnsPanel":
        """Remove every asset with at least one missing value."""
        mask = self.is_complete()
        if mask.all():
            return self
        dropped = [a for a, keep in zip(self.assets, mask) if not keep]
        logger.debug("Dropping %d assets with missing values: %s", len(dropped), dropped[:10])
        return self.select_assets(a for a, keep in zip(self.assets, mask) if keep)

    def with_sectors(self, mapping: Mapping[str, str]) -> "ReturnsPanel":
        return ReturnsPanel(self.dates, self.assets, self.values, dict(mapping))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=self.dates, columns=list(self.assets))

    def _sector_for(self, assets: Sequence[str]) -> Optional[Dict[str, str]]:
        if self.sector is None:
            return None
        return {a: self.sector[a] for a in assets if a in self.sector}


def load_panel(path: PathLike, format: Union[PanelFormat, str] = PanelFormat.CSV,
               start: Optional[str] = None, end: Optional[str] = None,
               drop_missing: bool = True) -> ReturnsPanel:
    """
    Read a returns panel from disk.

    Assets with any missing value inside [start, end] are dropped unless
    ``drop_missing`` is False, in which case gaps are kept as NaN and the
    per-window filter in ``market.windows`` takes care of them.
    """
    path = Path(path)
    fmt = PanelFormat(format)
    if fmt is PanelFormat.CSV:
        frame = _read_wide_csv(path)
    else:
        frame = _read_long_csv(path)

    if start is not None:
        frame = frame.loc[frame.index >= pd.Timestamp(start)]
    if end is not None:
        frame = frame.loc[frame.index <= pd.Timestamp(end)]

    panel = ReturnsPanel(frame.index, tuple(frame.columns), frame.to_numpy(dtype=float))
    if drop_missing:
        panel = panel.drop_incomplete()
    if panel.n_periods == 0 or panel.n_assets == 0:
        raise DomainError(f"panel {path} is empty after filtering")
    logger.info("Loaded panel %s: %d periods x %d assets", path.name, panel.n_periods, panel.n_assets)
    return panel


def write_panel(panel: ReturnsPanel, path: PathLike):
    """Write a panel in the wide CSV format read by ``load_panel``."""
    frame = panel.to_frame()
    frame.index = frame.index.strftime("%Y-%m-%d")
    frame.index.name = "date"
    frame.to_csv(path, na_rep="")


def load_sectors(path: PathLike) -> Dict[str, str]:
    """Read an ``asset,sector`` CSV into a mapping."""
    path = Path(path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    if list(frame.columns[:2]) != ["asset", "sector"]:
        raise FormatError(f"{path.name}: expected header 'asset,sector'", line=1)
    for row, (asset, sector) in enumerate(zip(frame["asset"], frame["sector"]), start=2):
        if not asset or not sector:
            raise FormatError(f"{path.name}: empty asset or sector", line=row)
    if frame["asset"].duplicated().any():
        raise FormatError(f"{path.name}: duplicate asset in sector map")
    return dict(zip(frame["asset"], frame["sector"]))


def _read_header(path: Path) -> list:
    try:
        with open(path, newline="") as handle:
            return next(csv.reader(handle))
    except StopIteration:
        raise FormatError(f"{path.name}: file is empty", line=1) from None


def _parse_dates(raw: pd.Series, path: Path) -> pd.DatetimeIndex:
    dates = pd.to_datetime(raw, format="ISO8601", errors="coerce")
    bad = np.flatnonzero(dates.isna().to_numpy())
    if bad.size:
        row = int(bad[0])
        raise FormatError(f"{path.name}: unparseable date '{raw.iloc[row]}'", line=row + 2)
    return pd.DatetimeIndex(dates)


def _parse_numbers(raw: pd.DataFrame, path: Path) -> pd.DataFrame:
    blank = raw.apply(lambda col: col.str.strip() == "")
    numbers = raw.apply(pd.to_numeric, errors="coerce")
    bad = numbers.isna() & ~blank
    if bad.to_numpy().any():
        row, col = np.argwhere(bad.to_numpy())[0]
        raise FormatError(f"{path.name}: non-numeric value '{raw.iat[row, col]}' "
                          f"for asset '{raw.columns[col]}'", line=int(row) + 2)
    return numbers


def _read_wide_csv(path: Path) -> pd.DataFrame:
    header = _read_header(path)
    if not header or header[0].strip() != "date":
        raise FormatError(f"{path.name}: first column must be 'date'", line=1)
    assets = [h.strip() for h in header[1:]]
    if len(set(assets)) != len(assets):
        raise FormatError(f"{path.name}: duplicate asset identifiers in header", line=1)

    raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    dates = _parse_dates(raw.iloc[:, 0], path)
    _check_increasing(dates, path)
    numbers = _parse_numbers(raw.iloc[:, 1:], path)
    numbers.columns = assets
    numbers.index = dates
    return numbers


def _read_long_csv(path: Path) -> pd.DataFrame:
    header = [h.strip() for h in _read_header(path)]
    if header[:3] != ["date", "asset", "return"]:
        raise FormatError(f"{path.name}: expected header 'date,asset,return'", line=1)
    raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    dates = _parse_dates(raw["date"], path)
    numbers = _parse_numbers(raw[["return"]], path)["return"]
    long = pd.DataFrame({"date": dates, "asset": raw["asset"].to_numpy(), "return": numbers.to_numpy()})
    duplicated = long.duplicated(["date", "asset"]).to_numpy()
    if duplicated.any():
        raise FormatError(f"{path.name}: duplicate (date, asset) row", line=int(np.argmax(duplicated)) + 2)
    # assets absent on a date become missing values
    return long.pivot(index="date", columns="asset", values="return").sort_index()


def _check_increasing(dates: pd.DatetimeIndex, path: Path):
    steps = np.diff(dates.asi8)
    bad = np.flatnonzero(steps <= 0)
    if bad.size:
        raise FormatError(f"{path.name}: dates must be strictly increasing", line=int(bad[0]) + 3)
