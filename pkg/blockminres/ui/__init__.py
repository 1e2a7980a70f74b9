"""
Command-line front end.
"""

from blockminres.ui.cli import CLI, RunConfig, build_parser, cli_main

__all__ = ["CLI", "RunConfig", "build_parser", "cli_main"]
