"""
Run configuration: one JSON file with a section per concern.

Precedence is command-line flags > config file > defaults in ``config.py``.
A manifest written by a previous run is accepted in place of a config file.
"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from config import (BacktestDefaults, ForestConfig, NetworkDefaults, RunDefaults, SelectionDefaults,
                    SyntheticDefaults, WindowDefaults)
from errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass
class DataSection:
    panel: Optional[str] = None          # panel file; the synthetic section is used when absent
    format: str = "csv"
    sectors: Optional[str] = None        # asset,sector CSV
    start: Optional[str] = None
    end: Optional[str] = None
    drop_missing: bool = True
    target: Optional[str] = None         # fund column for replication
    target_sector: Optional[str] = None


@dataclass
class SyntheticSection:
    n_assets: int = SyntheticDefaults.N_ASSETS
    n_periods: int = SyntheticDefaults.N_PERIODS
    n_relevant: int = SyntheticDefaults.N_RELEVANT
    beta_magnitude: float = SyntheticDefaults.BETA_MAGNITUDE
    correlation: float = SyntheticDefaults.CORRELATION
    noise_sd: float = SyntheticDefaults.NOISE_SD
    seed: Optional[int] = None           # draws use the run seed when absent


@dataclass
class SynthSection:
    scenario: str = "gaussian"           # gaussian | sector_fund | regime_switch | lead_lag
    params: Dict[str, Any] = field(default_factory=dict)


@dataclass
class WindowSection:
    length: int = WindowDefaults.LENGTH
    step: int = WindowDefaults.STEP
    drop_incomplete: bool = WindowDefaults.DROP_INCOMPLETE


@dataclass
class SelectionSection:
    method: str = SelectionDefaults.METHOD
    q: float = SelectionDefaults.Q
    q_grid: List[float] = field(default_factory=lambda: list(SelectionDefaults.Q_GRID))
    n_runs: int = SelectionDefaults.N_RUNS
    n_bootstraps: int = SelectionDefaults.N_BOOTSTRAPS
    subset_size: int = SelectionDefaults.SUBSET_SIZE
    trials: int = SelectionDefaults.TRIALS


@dataclass
class ForestSection:
    n_trees: int = ForestConfig.N_TREES
    max_depth: Optional[int] = ForestConfig.MAX_DEPTH
    min_leaf: int = ForestConfig.MIN_LEAF
    mtry: Optional[int] = None


@dataclass
class NetworkSection:
    kind: str = NetworkDefaults.KIND
    method: str = "forest_importance"
    q: float = SelectionDefaults.Q
    n_runs: int = 1
    null_samples: int = NetworkDefaults.NULL_SAMPLES


@dataclass
class BacktestSection:
    t_in: int = BacktestDefaults.T_IN
    horizon: int = BacktestDefaults.HORIZON
    q: float = BacktestDefaults.Q
    n_runs: int = BacktestDefaults.N_RUNS
    method: str = BacktestDefaults.METHOD
    rebalance: int = BacktestDefaults.REBALANCE
    refit_every: int = BacktestDefaults.REFIT_EVERY
    target_return: float = BacktestDefaults.TARGET_RETURN
    net_leverage: float = BacktestDefaults.NET_LEVERAGE
    covariance_filter: str = BacktestDefaults.COVARIANCE_FILTER
    return_sources: List[str] = field(default_factory=lambda: ["knockoff_prediction", "historical_mean"])


SECTIONS = {
    "data": DataSection,
    "synthetic": SyntheticSection,
    "synth": SynthSection,
    "window": WindowSection,
    "selection": SelectionSection,
    "forest": ForestSection,
    "network": NetworkSection,
    "backtest": BacktestSection,
}


@dataclass
class RunConfig:
    data: DataSection = field(default_factory=DataSection)
    synthetic: SyntheticSection = field(default_factory=SyntheticSection)
    synth: SynthSection = field(default_factory=SynthSection)
    window: WindowSection = field(default_factory=WindowSection)
    selection: SelectionSection = field(default_factory=SelectionSection)
    forest: ForestSection = field(default_factory=ForestSection)
    network: NetworkSection = field(default_factory=NetworkSection)
    backtest: BacktestSection = field(default_factory=BacktestSection)
    seed: int = RunDefaults.SEED
    workers: int = RunDefaults.WORKERS
    out: str = RunDefaults.OUT_DIR

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def with_overrides(self, seed: Optional[int] = None, workers: Optional[int] = None,
                       out: Optional[str] = None) -> "RunConfig":
        """Apply command-line flags; ``None`` leaves the configured value."""
        updated = replace(self)
        if seed is not None:
            updated.seed = seed
        if workers is not None:
            updated.workers = workers
        if out is not None:
            updated.out = out
        updated.validate()
        return updated

    def validate(self):
        if not _is_u64(self.seed):
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if isinstance(self.workers, bool) or not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {self.workers!r}")
        if self.synthetic.seed is not None and not _is_u64(self.synthetic.seed):
            raise ConfigError(f"synthetic.seed must be an unsigned 64-bit integer, got {self.synthetic.seed!r}")
        for where, q in (("selection.q", self.selection.q), ("network.q", self.network.q),
                         ("backtest.q", self.backtest.q)):
            _check_level(where, q)
        if not self.selection.q_grid:
            raise ConfigError("selection.q_grid must not be empty")
        for q in self.selection.q_grid:
            _check_level("selection.q_grid", q)
        for key in ("panel", "sectors"):
            path = getattr(self.data, key)
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"data.{key}: file not found: {path}")


def _is_u64(value: Any) -> bool:
    return not isinstance(value, bool) and isinstance(value, int) and 0 <= value < 2 ** 64


def _check_level(where: str, q: Any):
    if isinstance(q, bool) or not isinstance(q, (int, float)) or not 0.0 < q < 1.0:
        raise ConfigError(f"{where}: FDR level must lie in (0, 1), got {q!r}")


def load_run_config(path: Optional[str] = None) -> RunConfig:
    """Read a config (or a previous run's manifest); no path gives all defaults."""
    if path is None:
        config = RunConfig()
        config.validate()
        return config
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    if "config" in raw and "command" in raw:
        logger.info("Replaying manifest %s (command %s)", path, raw["command"])
        raw = raw["config"]
    config = from_dict(raw)
    config.validate()
    return config


def from_dict(raw: Dict[str, Any]) -> RunConfig:
    top_level = {"seed", "workers", "out"}
    unknown = set(raw) - set(SECTIONS) - top_level
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for name, cls in SECTIONS.items():
        if name in raw:
            kwargs[name] = _section(name, cls, raw[name])
    for name in top_level:
        if name in raw:
            kwargs[name] = raw[name]
    if "out" in kwargs and not isinstance(kwargs["out"], str):
        raise ConfigError("out must be a string")
    return RunConfig(**kwargs)


def _section(name: str, cls, raw: Any):
    if not isinstance(raw, dict):
        raise ConfigError(f"section '{name}' must be an object")
    known = {f.name: f for f in fields(cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"unknown keys in section '{name}': {sorted(unknown)}")
    defaults = cls()
    values = {}
    for key, value in raw.items():
        values[key] = _coerce(f"{name}.{key}", value, getattr(defaults, key), known[key].type)
    return cls(**values)


def _coerce(where: str, value: Any, default: Any, annotation: Any) -> Any:
    optional = "Optional" in str(annotation) or default is None
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{where} must not be null")
    if isinstance(default, bool) or annotation is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false")
        return value
    if annotation in (int, Optional[int]):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return value
    if annotation is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value)
    if annotation in (str, Optional[str]):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be a list")
        return list(value)
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{where} must be an object")
        return dict(value)
    return value


def version_table(packages: Tuple[str, ...] = ("numpy", "scipy", "pandas", "scikit-learn", "statsmodels",
                                              "networkx", "joblib", "gymnasium")) -> Dict[str, str]:
    """Installed versions of the numeric stack, for the manifest."""
    table = {}
    for name in packages:
        try:
            table[name] = version(name)
        except PackageNotFoundError:
            table[name] = "not installed"
    return table
