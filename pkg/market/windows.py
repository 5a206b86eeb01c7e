"""
Rolling calibration windows over a returns panel.
"""

from dataclasses import dataclass
from typing import List

from config import WindowDefaults
from errors import DomainError
from market.panel import ReturnsPanel


@dataclass(frozen=True)
class WindowPlan:
    """Window length and spacing, both in periods."""
    length: int = WindowDefaults.LENGTH
    step: int = WindowDefaults.STEP
    drop_incomplete: bool = WindowDefaults.DROP_INCOMPLETE

    def __post_init__(self):
        if self.length < 2:
            raise DomainError(f"window length must be >= 2, got {self.length}")
        if self.step < 1:
            raise DomainError(f"window step must be >= 1, got {self.step}")

    def count(self, n_periods: int) -> int:
        if self.length > n_periods:
            return 0
        return (n_periods - self.length) // self.step + 1

    def starts(self, n_periods: int) -> range:
        return range(0, n_periods - self.length + 1, self.step)


def windows(panel: ReturnsPanel, plan: WindowPlan) -> List[ReturnsPanel]:
    """
    Slice the panel into windows [t0, t0 + length), one every ``step`` rows.
    Raises DomainError if dropping incomplete assets empties a window.
    """
    if plan.length > panel.n_periods:
        raise DomainError(f"window length {plan.length} exceeds panel length {panel.n_periods}")
    views = []
    for start in plan.starts(panel.n_periods):
        view = panel.slice_rows(start, start + plan.length)
        if plan.drop_incomplete:
            view = view.drop_incomplete()
            if view.n_assets == 0:
                raise DomainError(f"window ending {view.dates[-1].date()} has no asset without missing values")
        views.append(view)
    return views
