"""Market data package: return panels, synthetic designs and rolling windows."""

from market.panel import PanelFormat, ReturnsPanel, load_panel, load_sectors, write_panel
from market.synthetic import (
    LeadLagSpec, RegimeSwitchSpec, SectorFundSpec, SyntheticSpec,
    generate_lead_lag, generate_regime_switch, generate_sector_fund, generate_synthetic,
)
from market.windows import WindowPlan, windows

__all__ = [
    'PanelFormat', 'ReturnsPanel', 'load_panel', 'load_sectors', 'write_panel',
    'SyntheticSpec', 'SectorFundSpec', 'RegimeSwitchSpec', 'LeadLagSpec',
    'generate_synthetic', 'generate_sector_fund', 'generate_regime_switch', 'generate_lead_lag',
    'WindowPlan', 'windows',
]
