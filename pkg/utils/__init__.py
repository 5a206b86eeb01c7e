"""Utility package: seeding, worker pool and logging setup."""

from utils.seeding import derive_seed, rng
from utils.parallel import run_tasks

__all__ = ['derive_seed', 'rng', 'run_tasks']
