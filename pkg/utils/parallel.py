"""
Worker pool used for task-level fan-out (assets, windows, runs, trials).
"""

import logging
from typing import Any, Callable, Iterable, List, Sequence

from joblib import Parallel, delayed

logger = logging.getLogger(__name__)


def run_tasks(fn: Callable[..., Any], tasks: Iterable[Sequence[Any]], workers: int = 1) -> List[Any]:
    """Run ``fn(*task)`` for every task; results come back in task order."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*task) for task in tasks]
    logger.debug("Dispatching %d tasks to %d workers", len(tasks), workers)
    return Parallel(n_jobs=workers)(delayed(fn)(*task) for task in tasks)
