"""
Entry point for the knockoff factor-selection engine.
Parses the subcommand and exits with its status code.
"""

import logging
import sys

from cli import run


def main():
    """Run one subcommand and exit with 0 (success), 2 (config error) or 3 (data error)."""
    try:
        status = run(sys.argv[1:])
    except KeyboardInterrupt:
        print("\nRun interrupted by user")
        status = 130
    except Exception:
        logging.getLogger(__name__).exception("Run crashed")
        status = 1
    sys.exit(status)


if __name__ == "__main__":
    main()
