"""
Configuration loading for blockminres.

Values come from a YAML file merged over built-in defaults. The CLI lets
flags override whatever the file says.
"""

import copy
import os
from typing import Any, Dict, Optional

import yaml

from blockminres.utils.logging_config import get_logger

logger = get_logger("config")

CONFIG_ENV_VAR = "BLOCKMINRES_CONFIG"
LOG_LEVEL_ENV_VAR = "BLOCKMINRES_LOG_LEVEL"

DEFAULT_CONFIG: Dict[str, Any] = {
    "solver": {
        "rel_tol": 1e-6,
        "max_iter": 1000,
        "breakdown_tol": 1e-14,
        "monitor": True,
    },
    "preconditioner": {
        "dense_limit": 4000,
    },
    "verify": {
        "tolerance": 1e-8,
    },
    "problems": {
        "seed": 42,
        "stokes": {
            "viscosity": 1e-3,
            "length": 10.0,
            "height": 1.0,
        },
    },
    "logging": {
        "level": "INFO",
        "log_to_file": True,
        "log_format": "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    },
}


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load configuration from a YAML file.

    Args:
        config_path: Path to the configuration file. Falls back to the
            BLOCKMINRES_CONFIG environment variable, then to "config.yaml".

    Returns:
        The merged configuration.
    """
    if config_path is None:
        config_path = os.environ.get(CONFIG_ENV_VAR, "config.yaml")

    default_config = copy.deepcopy(DEFAULT_CONFIG)

    if not os.path.exists(config_path):
        logger.warning(f"Config file {config_path} not found. Using default configuration.")
        return default_config

    try:
        with open(config_path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f) or {}

        merged_config = merge_configs(default_config, config)
        logger.debug(f"Configuration loaded from {config_path}")
        return merged_config
    except (OSError, yaml.YAMLError) as e:
        logger.error(f"Error loading config file {config_path}: {e}")
        logger.info("Using default configuration")
        return default_config


def merge_configs(default: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """
    Merge two configuration dictionaries recursively.

    Args:
        default: Default configuration.
        override: Override configuration.

    Returns:
        The merged configuration.
    """
    result = default.copy()

    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = merge_configs(result[key], value)
        else:
            result[key] = value

    return result
