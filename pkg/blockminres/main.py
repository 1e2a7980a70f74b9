"""
blockminres - command-line entry point.
"""

import sys

from dotenv import load_dotenv

from blockminres.ui.cli import cli_main


def main():
    """Entry point of the blockminres console script."""
    load_dotenv()
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
