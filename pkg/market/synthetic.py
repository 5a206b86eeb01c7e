"""
Synthetic return panels with known ground truth.

The Gaussian equicorrelated design is the calibration harness: second-order
knockoffs are exact under it, so the realized FDR can be compared with the
chosen level. The other scenarios mimic the applied studies (fund
replication, crisis-like correlation jumps, lead-lag prediction).
"""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Tuple

import numpy as np
import pandas as pd

from config import SyntheticDefaults
from errors import DomainError
from market.panel import ReturnsPanel
from utils.seeding import rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian linear model y = X beta + z with equicorrelated X."""
    n_assets: int = SyntheticDefaults.N_ASSETS
    n_periods: int = SyntheticDefaults.N_PERIODS
    n_relevant: int = SyntheticDefaults.N_RELEVANT
    beta_magnitude: float = SyntheticDefaults.BETA_MAGNITUDE
    correlation: float = SyntheticDefaults.CORRELATION
    noise_sd: float = SyntheticDefaults.NOISE_SD
    seed: int = 0

    def __post_init__(self):
        if self.n_assets < 1 or self.n_periods < 2:
            raise DomainError("synthetic panel needs n_assets >= 1 and n_periods >= 2")
        if not 0 <= self.n_relevant <= self.n_assets:
            raise DomainError(f"n_relevant={self.n_relevant} must lie in [0, n_assets={self.n_assets}]")
        if not 0.0 <= self.correlation < 1.0:
            raise DomainError(f"correlation must lie in [0, 1), got {self.correlation}")
        if self.noise_sd <= 0:
            raise DomainError(f"noise_sd must be positive, got {self.noise_sd}")


@dataclass(frozen=True)
class SectorFundSpec:
    """Sector-structured equities plus one fund tracking a basket of one sector."""
    n_sectors: int = 5
    assets_per_sector: int = 20
    n_holdings: int = 10
    n_periods: int = 252
    market_sd: float = 0.01
    sector_sd: float = 0.01
    idiosyncratic_sd: float = 0.015
    tracking_sd: float = 0.002
    fund_name: str = "FUND"
    seed: int = 0

    def __post_init__(self):
        if self.n_sectors < 1 or self.assets_per_sector < 1:
            raise DomainError("sector fund needs at least one sector and one asset per sector")
        if not 1 <= self.n_holdings <= self.assets_per_sector:
            raise DomainError("n_holdings must lie in [1, assets_per_sector]")


@dataclass(frozen=True)
class RegimeSwitchSpec:
    """Common-factor correlation that jumps at ``break_fraction`` of the sample."""
    n_assets: int = 20
    n_periods: int = 600
    n_sectors: int = 4
    correlation_before: float = 0.1
    correlation_after: float = 0.6
    sector_correlation: float = 0.2
    break_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for rho in (self.correlation_before, self.correlation_after):
            if not 0.0 <= rho + self.sector_correlation < 1.0:
                raise DomainError("common plus sector correlation must lie in [0, 1)")
        if not 0.0 < self.break_fraction < 1.0:
            raise DomainError("break_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class LeadLagSpec:
    """
    Followers driven by the previous-period returns of k leaders.
    Follower noise grows with k, so forecasts degrade as k_in grows.
    """
    n_leaders: int = 20
    max_k_in: int = 5
    followers_per_k: int = 4
    n_periods: int = 400
    signal: float = 0.6
    noise_base: float = 0.5
    noise_growth: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.max_k_in <= self.n_leaders:
            raise DomainError("max_k_in must lie in [1, n_leaders]")
        if self.noise_base <= 0 or self.noise_growth < 0:
            raise DomainError("noise_base must be positive and noise_growth non-negative")


def generate_synthetic(spec: SyntheticSpec) -> Tuple[ReturnsPanel, FrozenSet[int]]:
    """
    Draw X ~ N(0, equicorrelation(rho)), y = X beta + z.

    The returned panel has the response as its first column (named
    ``SyntheticDefaults.TARGET_COLUMN``) followed by the N factors; the
    support indexes factor columns (0-based, response excluded).
    """
    gen = rng(spec.seed)
    T, N = spec.n_periods, spec.n_assets
    common = gen.standard_normal(T)
    idiosyncratic = gen.standard_normal((T, N))
    X = np.sqrt(spec.correlation) * common[:, None] + np.sqrt(1.0 - spec.correlation) * idiosyncratic

    support = np.sort(gen.choice(N, size=spec.n_relevant, replace=False))
    beta = np.zeros(N)
    beta[support] = spec.beta_magnitude * gen.choice([-1.0, 1.0], size=spec.n_relevant)
    y = X @ beta + spec.noise_sd * gen.standard_normal(T)

    assets = (SyntheticDefaults.TARGET_COLUMN,) + tuple(f"x{j}" for j in range(N))
    panel = ReturnsPanel(_calendar(T), assets, np.column_stack([y, X]))
    return panel, frozenset(int(j) for j in support)


def generate_sector_fund(spec: SectorFundSpec) -> Tuple[ReturnsPanel, FrozenSet[str]]:
    """
    Equities with market + sector + idiosyncratic returns, and a fund column
    equal to an equally weighted basket of ``n_holdings`` names of sector S0.
    Returns the panel (fund first, sectors attached) and the holdings.
    """
    gen = rng(spec.seed)
    T = spec.n_periods
    market = spec.market_sd * gen.standard_normal(T)
    sectors = spec.sector_sd * gen.standard_normal((T, spec.n_sectors))

    names, labels, columns = [], {}, []
    for k in range(spec.n_sectors):
        for a in range(spec.assets_per_sector):
            name = f"S{k}A{a}"
            names.append(name)
            labels[name] = f"S{k}"
            columns.append(market + sectors[:, k] + spec.idiosyncratic_sd * gen.standard_normal(T))
    returns = np.column_stack(columns)

    holdings = np.sort(gen.choice(spec.assets_per_sector, size=spec.n_holdings, replace=False))
    fund = returns[:, holdings].mean(axis=1) + spec.tracking_sd * gen.standard_normal(T)
    labels[spec.fund_name] = "S0"

    panel = ReturnsPanel(_calendar(T), (spec.fund_name,) + tuple(names),
                         np.column_stack([fund, returns]), labels)
    return panel, frozenset(names[h] for h in holdings)


def generate_regime_switch(spec: RegimeSwitchSpec) -> Tuple[ReturnsPanel, int]:
    """Sector-labelled panel whose common-factor correlation jumps at the break row."""
    gen = rng(spec.seed)
    T, N = spec.n_periods, spec.n_assets
    brk = int(round(spec.break_fraction * T))
    rho = np.where(np.arange(T) < brk, spec.correlation_before, spec.correlation_after)

    sector_of = np.arange(N) % spec.n_sectors
    common = gen.standard_normal(T)
    sector_factors = gen.standard_normal((T, spec.n_sectors))
    noise = gen.standard_normal((T, N))
    idio = np.sqrt(1.0 - rho - spec.sector_correlation)
    values = (np.sqrt(rho)[:, None] * common[:, None]
              + np.sqrt(spec.sector_correlation) * sector_factors[:, sector_of]
              + idio[:, None] * noise)

    assets = tuple(f"a{j}" for j in range(N))
    labels = {a: f"S{sector_of[j]}" for j, a in enumerate(assets)}
    return ReturnsPanel(_calendar(T), assets, values, labels), brk


def generate_lead_lag(spec: LeadLagSpec) -> Tuple[ReturnsPanel, Dict[str, FrozenSet[str]]]:
    """
    Leaders are i.i.d. Gaussian; follower i with k leaders satisfies
    r_{i,t+1} = signal/sqrt(k) * sum_j r_{j,t} + noise_k * e_{i,t+1}
    with noise_k = noise_base * (1 + noise_growth * (k - 1)).
    Returns the panel and the planted predictor sets.
    """
    gen = rng(spec.seed)
    T = spec.n_periods
    leaders = gen.standard_normal((T, spec.n_leaders))
    leader_names = [f"L{j}" for j in range(spec.n_leaders)]

    followers, truth = [], {}
    for k in range(1, spec.max_k_in + 1):
        noise_sd = spec.noise_base * (1.0 + spec.noise_growth * (k - 1))
        for f in range(spec.followers_per_k):
            chosen = np.sort(gen.choice(spec.n_leaders, size=k, replace=False))
            series = noise_sd * gen.standard_normal(T)
            series[1:] += spec.signal / np.sqrt(k) * leaders[:-1, chosen].sum(axis=1)
            name = f"F{k}_{f}"
            followers.append(series)
            truth[name] = frozenset(leader_names[j] for j in chosen)

    assets = tuple(leader_names) + tuple(truth)
    values = np.column_stack([leaders] + followers)
    return ReturnsPanel(_calendar(T), assets, values), truth


def _calendar(n_periods: int) -> pd.DatetimeIndex:
    return pd.bdate_range(SyntheticDefaults.START_DATE, periods=n_periods)
