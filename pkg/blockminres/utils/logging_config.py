"""
Centralized logging setup for blockminres.

Console output goes to stderr; when a directory is given (usually the run
output directory) a log file is written there as well.
"""

import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional, Union

DEFAULT_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def setup_logging(
    log_level: str = "INFO",
    log_dir: Optional[Union[str, Path]] = None,
    session_name: Optional[str] = None,
    log_format: str = DEFAULT_FORMAT,
) -> logging.Logger:
    """
    Configure logging for the whole package.

    Args:
        log_level: Console level (DEBUG, INFO, WARNING, ERROR).
        log_dir: Directory for the log file. No file is written when None.
        session_name: Base name of the log file.
        log_format: Format string shared by all handlers.

    Returns:
        The package root logger.
    """
    formatter = logging.Formatter(fmt=log_format, datefmt="%Y-%m-%d %H:%M:%S")

    root_logger = logging.getLogger("blockminres")
    root_logger.setLevel(logging.DEBUG)

    # Drop handlers from a previous call (tests call cli_main repeatedly)
    for handler in list(root_logger.handlers):
        handler.close()
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(getattr(logging, log_level.upper()))
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        if session_name is None:
            session_name = f"blockminres_{datetime.now().strftime('%Y%m%d_%H%M%S')}"
        log_file = log_dir / f"{session_name}.log"

        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)  # everything goes to the file
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)
        root_logger.debug(f"Log file: {log_file}")

    return root_logger


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger below the package root.

    Args:
        name: Module name, e.g. "solver".

    Returns:
        Logger instance named "blockminres.<name>".
    """
    return logging.getLogger(f"blockminres.{name}")
