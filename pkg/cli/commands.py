"""
Subcommands. Each one reads a resolved RunConfig, writes its tables into
``config.out`` and records a manifest next to them.
"""

import json
import logging
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import pandas as pd

from backtest import (BacktestConfig, ReturnSource, forecast_path, hit_ratio_by_kin, run_equal_weight,
                      run_mean_variance, summarize, write_forecasts, write_ledger, write_performance,
                      write_summary)
from cli.run_config import RunConfig, version_table
from config import RunDefaults, SelectionDefaults, SyntheticDefaults
from errors import ConfigError, DomainError
from learners import ForestSettings
from market import (LeadLagSpec, PanelFormat, RegimeSwitchSpec, ReturnsPanel, SectorFundSpec, SyntheticSpec,
                    WindowPlan,
                    generate_lead_lag, generate_regime_switch, generate_sector_fund, generate_synthetic,
                    load_panel, load_sectors, write_panel)
from networks import NetworkKind, infer_networks, metrics_timeseries, write_edges, write_metrics
from selection import (StatisticMethod, calibrate_fdr, calibration_summary, replicate, replication_fdr,
                       write_calibration)

logger = logging.getLogger(__name__)

SCENARIOS = ("gaussian", "sector_fund", "regime_switch", "lead_lag")


@contextmanager
def config_errors(section: str):
    """Report invalid parameter values as configuration errors."""
    try:
        yield
    except (DomainError, ValueError, TypeError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


def cmd_calibrate(config: RunConfig) -> Path:
    """Realized versus chosen FDR on the synthetic Gaussian design."""
    with config_errors("synthetic"):
        spec = synthetic_spec(config)
    with config_errors("selection"):
        method = StatisticMethod(config.selection.method)
        if config.selection.trials < SelectionDefaults.MIN_TRIALS:
            raise ValueError(f"trials must be >= {SelectionDefaults.MIN_TRIALS}, got {config.selection.trials}")
    forest = _forest(config)
    report = calibrate_fdr(spec, config.selection.q_grid, method, config.selection.trials,
                           forest, config.workers)
    out = _out_dir(config)
    write_calibration(report, out / "calibration.csv")
    summary = calibration_summary(report)
    summary.to_csv(out / "calibration_summary.csv", index=False)
    for row in summary.itertuples():
        logger.info("q=%.2f realized FDR=%.3f (se %.3f) power=%.3f", row.q, row.realized_fdr,
                    row.std_error, row.power)
    write_manifest(out, "calibrate", config)
    return out


def cmd_replicate(config: RunConfig) -> Path:
    """
    Bootstrap selection frequencies of the assets explaining a target column.
    With a sector map, the study is repeated over ``selection.q_grid`` and the
    realized (sector-measured) FDR of every level is written next to it.
    """
    panel, truth = _panel(config)
    target = config.data.target or truth.get("target")
    if target is None or target not in panel.assets:
        raise ConfigError(f"data.target: '{target}' is not a column of the panel")
    plan = _plan(config)
    with config_errors("selection"):
        method = StatisticMethod(config.selection.method)
    selection = config.selection

    def study(q: float) -> pd.DataFrame:
        return replicate(panel, target, plan, selection.subset_size, selection.n_bootstraps,
                         method, q, config.seed, _forest(config), config.workers)

    table = study(selection.q)
    out = _out_dir(config)
    table[["window_end", "asset", "frequency"]].to_csv(out / "replication.csv", index=False)

    target_sector = config.data.target_sector or truth.get("target_sector")
    if panel.sector is not None and target_sector is not None:
        frames = []
        for q in sorted(set(selection.q_grid) | {selection.q}):
            fdr = replication_fdr(table if q == selection.q else study(q), panel.sector, target_sector)
            fdr.insert(0, "q", q)
            frames.append(fdr)
            logger.info("q=%.2f mean realized replication FDR=%.3f", q, fdr["realized_fdr"].mean())
        fdr = pd.concat(frames, ignore_index=True)
        fdr.to_csv(out / "replication_fdr.csv", index=False)
        summary = fdr.groupby("q", as_index=False).agg(realized_fdr=("realized_fdr", "mean"),
                                                       selections=("selections", "sum"))
        summary.to_csv(out / "replication_summary.csv", index=False)
    write_manifest(out, "replicate", config)
    return out


def cmd_network(config: RunConfig) -> Path:
    """Edge lists of explanatory or prediction networks over rolling windows."""
    panel, _ = _panel(config)
    kind, method = _network_kind(config)
    networks = infer_networks(panel, _plan(config), kind, method, config.network.q, config.network.n_runs,
                              config.seed, _forest(config), config.workers)
    out = _out_dir(config)
    write_edges(networks, out / "edges.csv")
    write_manifest(out, "network", config)
    return out


def cmd_metrics(config: RunConfig) -> Path:
    """Network metric time series (with degree-preserving null statistics) plus edge lists."""
    panel, _ = _panel(config)
    kind, method = _network_kind(config)
    networks, table = metrics_timeseries(panel, _plan(config), kind, method, config.network.q,
                                         config.network.n_runs, config.network.null_samples, config.seed,
                                         _forest(config), config.workers)
    out = _out_dir(config)
    write_edges(networks, out / "edges.csv")
    write_metrics(table, out / "metrics.csv")
    write_manifest(out, "metrics", config)
    return out


def cmd_backtest(config: RunConfig) -> Path:
    """Equal-weight and mean-variance strategies on walk-forward knockoff forecasts."""
    panel, _ = _panel(config)
    section = config.backtest
    with config_errors("backtest"):
        settings = BacktestConfig(t_in=section.t_in, horizon=section.horizon, q=section.q,
                                  n_runs=section.n_runs, method=section.method, rebalance=section.rebalance,
                                  refit_every=section.refit_every, target_return=section.target_return,
                                  net_leverage=section.net_leverage,
                                  covariance_filter=section.covariance_filter)
        sources = [ReturnSource(s) for s in section.return_sources]

    panel = panel.drop_incomplete()
    forecasts = forecast_path(panel, settings, config.seed, _forest(config), config.workers)
    ledger = run_equal_weight(panel, settings, forecasts=forecasts)
    for source in sources:
        ledger = ledger.merge(run_mean_variance(panel, settings, return_source=source, forecasts=forecasts))

    out = _out_dir(config)
    write_ledger(ledger, out / "ledger.csv")
    write_forecasts(ledger, out / "forecasts.csv")
    write_performance(ledger, out / "performance.csv")
    write_summary(summarize(ledger), out / "summary.csv")
    if not ledger.forecasts.empty:
        hit_ratio_by_kin(ledger).to_csv(out / "hit_ratio.csv", index=False, na_rep="")
    with open(out / "backtest_metadata.json", "w") as handle:
        json.dump(ledger.metadata, handle, indent=2)
    logger.info(ledger.metadata["caveat"])
    write_manifest(out, "backtest", config)
    return out


def cmd_synth(config: RunConfig) -> Path:
    """Write a synthetic scenario as panel.csv (+ sectors.csv) and its ground truth."""
    panel, truth = synthesize(config)
    out = _out_dir(config)
    write_panel(panel, out / "panel.csv")
    if panel.sector is not None:
        sectors = pd.DataFrame({"asset": list(panel.sector), "sector": list(panel.sector.values())})
        sectors.to_csv(out / "sectors.csv", index=False)
    with open(out / "truth.json", "w") as handle:
        json.dump(truth, handle, indent=2, sort_keys=True)
    write_manifest(out, "synth", config)
    return out


COMMANDS = {
    "calibrate": cmd_calibrate,
    "replicate": cmd_replicate,
    "network": cmd_network,
    "metrics": cmd_metrics,
    "backtest": cmd_backtest,
    "synth": cmd_synth,
}


def synthesize(config: RunConfig) -> Tuple[ReturnsPanel, Dict[str, Any]]:
    """
    Generate the scenario named in the synth section, seeded by the run seed
    (the gaussian scenario honours ``synthetic.seed`` when it is set).
    """
    scenario = config.synth.scenario
    params = dict(config.synth.params)
    if scenario not in SCENARIOS:
        raise ConfigError(f"synth.scenario must be one of {SCENARIOS}, got '{scenario}'")

    with config_errors(f"synth ({scenario})"):
        if scenario == "gaussian":
            spec = synthetic_spec(config, **params)
            panel, support = generate_synthetic(spec)
            factors = panel.assets[1:]
            truth = {"target": SyntheticDefaults.TARGET_COLUMN,
                     "support": sorted(factors[j] for j in support)}
        elif scenario == "sector_fund":
            spec = SectorFundSpec(**{**params, "seed": config.seed})
            panel, holdings = generate_sector_fund(spec)
            truth = {"target": spec.fund_name, "target_sector": "S0", "holdings": sorted(holdings)}
        elif scenario == "regime_switch":
            spec = RegimeSwitchSpec(**{**params, "seed": config.seed})
            panel, brk = generate_regime_switch(spec)
            truth = {"break_row": brk, "break_date": panel.dates[brk].strftime("%Y-%m-%d")}
        else:
            spec = LeadLagSpec(**{**params, "seed": config.seed})
            panel, predictors = generate_lead_lag(spec)
            truth = {"predictors": {f: sorted(p) for f, p in predictors.items()}}
    logger.info("Synthesized %s scenario: %d periods x %d assets", scenario, panel.n_periods, panel.n_assets)
    return panel, truth


def synthetic_spec(config: RunConfig, **params) -> SyntheticSpec:
    """The synthetic section as a SyntheticSpec; its own seed wins over the run seed."""
    section = asdict(config.synthetic)
    seed = section.pop("seed")
    return SyntheticSpec(**{**section, **params, "seed": config.seed if seed is None else seed})


def write_manifest(out: Path, command: str, config: RunConfig, extra: Optional[Dict[str, Any]] = None):
    """Full resolved config, base seed and package versions; replayable through --config."""
    manifest = {
        "command": command,
        "seed": config.seed,
        "config": config.to_dict(),
        "versions": version_table(),
    }
    if extra:
        manifest.update(extra)
    with open(out / RunDefaults.MANIFEST, "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)


def _panel(config: RunConfig) -> Tuple[ReturnsPanel, Dict[str, Any]]:
    data = config.data
    if data.panel is None:
        return synthesize(config)
    with config_errors("data"):
        fmt = PanelFormat(data.format)
    panel = load_panel(data.panel, fmt, data.start, data.end, data.drop_missing)
    if data.sectors is not None:
        panel = panel.with_sectors(load_sectors(data.sectors))
    return panel, {}


def _plan(config: RunConfig) -> WindowPlan:
    with config_errors("window"):
        return WindowPlan(config.window.length, config.window.step, config.window.drop_incomplete)


def _forest(config: RunConfig) -> ForestSettings:
    with config_errors("forest"):
        settings = ForestSettings(**asdict(config.forest))
        if settings.n_trees < 1 or settings.min_leaf < 1:
            raise ValueError("n_trees and min_leaf must be >= 1")
    return settings


def _network_kind(config: RunConfig):
    with config_errors("network"):
        return NetworkKind(config.network.kind), StatisticMethod(config.network.method)


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out
