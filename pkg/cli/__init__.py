"""
Command-line interface - run configuration, subcommands and the application wrapper.
"""

from cli.run_config import RunConfig, from_dict, load_run_config
from cli.commands import (COMMANDS, cmd_backtest, cmd_calibrate, cmd_metrics, cmd_network, cmd_replicate,
                          cmd_synth, synthesize, write_manifest)
from cli.app import EXIT_CONFIG, EXIT_DATA, EXIT_OK, Application, build_parser, run

__all__ = [
    "RunConfig", "from_dict", "load_run_config",
    "COMMANDS", "cmd_backtest", "cmd_calibrate", "cmd_metrics", "cmd_network", "cmd_replicate",
    "cmd_synth", "synthesize", "write_manifest",
    "EXIT_CONFIG", "EXIT_DATA", "EXIT_OK", "Application", "build_parser", "run",
]
