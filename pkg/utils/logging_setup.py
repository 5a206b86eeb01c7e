"""
Logging configuration for command-line runs.
"""

import logging

from config import LogConfig


def configure_logging(verbose: bool = False):
    """Install a single stream handler on the root logger."""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format=LogConfig.FORMAT,
                        datefmt=LogConfig.DATE_FORMAT, force=True)
    # sklearn/joblib chatter is not useful at INFO
    logging.getLogger("joblib").setLevel(logging.WARNING)
