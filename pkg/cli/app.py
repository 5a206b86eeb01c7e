"""
Command-line application: argument parsing, config resolution and exit codes.
"""

import argparse
import logging
from typing import List, Optional

from cli.commands import COMMANDS
from cli.run_config import RunConfig, load_run_config
from errors import ConfigError, DomainError
from utils.logging_setup import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="knockoff-factors",
        description="Knockoff factor selection: FDR calibration, fund replication, "
                    "asset networks and prediction backtests.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "calibrate": "realized vs chosen FDR on synthetic data",
        "replicate": "bootstrap selection frequencies for a target column",
        "network": "explanatory / prediction network edge lists",
        "metrics": "network metric time series",
        "backtest": "walk-forward equal-weight and mean-variance backtests",
        "synth": "write a synthetic scenario to disk",
    }
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=helps[name])
        cmd.add_argument("--config", type=str, default=None, help="JSON config file or a previous manifest")
        cmd.add_argument("--seed", type=int, default=None, help="base seed (unsigned 64-bit)")
        cmd.add_argument("--workers", type=int, default=None, help="worker processes")
        cmd.add_argument("--out", type=str, default=None, help="output directory")
        cmd.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


class Application:
    """Resolves the run configuration and dispatches one subcommand."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config: Optional[RunConfig] = None

    def resolve(self) -> RunConfig:
        config = load_run_config(self.args.config)
        self.config = config.with_overrides(seed=self.args.seed, workers=self.args.workers, out=self.args.out)
        return self.config

    def run(self) -> int:
        try:
            config = self.resolve()
            logger.info("Running %s (seed=%d, workers=%d, out=%s)", self.args.command, config.seed,
                        config.workers, config.out)
            out = COMMANDS[self.args.command](config)
        except ConfigError as exc:
            logger.error("Configuration error: %s", exc)
            return EXIT_CONFIG
        except (DomainError, OSError) as exc:
            logger.error("Data error: %s", exc)
            return EXIT_DATA
        logger.info("Outputs written to %s", out)
        return EXIT_OK


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    return Application(args).run()
