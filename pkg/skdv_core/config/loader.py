"""
Configuration loader with environment variable support.

Loads configuration from YAML files and resolves environment variables.
"""

import os
from pathlib import Path
from typing import Any, Optional, Type, TypeVar

import yaml
from pydantic import BaseModel, ValidationError

from skdv_core.config.models import AppConfig, resolve_env_vars
from skdv_core.exceptions import ConfigError
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)

T = TypeVar("T", bound=BaseModel)

COMMON_CONFIG_FILENAME = "common_config.yaml"
CONFIG_PATH_ENV = "SKDV_CONFIG_PATH"


def _resolve_dict_env_vars(d: dict) -> dict:
    """Recursively resolve environment variables in a dictionary."""
    result = {}
    for key, value in d.items():
        if isinstance(value, dict):
            result[key] = _resolve_dict_env_vars(value)
        elif isinstance(value, list):
            result[key] = [
                _resolve_dict_env_vars(item) if isinstance(item, dict)
                else resolve_env_vars(item) if isinstance(item, str) and "${" in item
                else item
                for item in value
            ]
        elif isinstance(value, str) and "${" in value:
            result[key] = resolve_env_vars(value)
        else:
            result[key] = value
    return result


def load_yaml(path: Path) -> dict[str, Any]:
    """
    Load YAML file and resolve environment variables.

    Raises:
        ConfigError: missing file, invalid YAML or a top level that is not a mapping
    """
    if not path.exists():
        raise ConfigError(f"Configuration file not found: {path}")

    try:
        with open(path, "r", encoding="utf-8") as f:
            content = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise ConfigError(f"Invalid YAML in {path}", str(exc)) from exc

    if content is None:
        return {}
    if not isinstance(content, dict):
        raise ConfigError(f"Configuration in {path} must be a mapping")

    try:
        return _resolve_dict_env_vars(content)
    except ValueError as exc:
        raise ConfigError(str(exc), str(path)) from exc


def save_yaml(data: dict[str, Any], path: Path) -> None:
    """Save dictionary to YAML file."""
    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)

    logger.debug("Saved configuration", path=str(path))


def _deep_merge(base: dict, override: dict) -> dict:
    """Deep-merge *override* into *base* (override values win)."""
    result = base.copy()
    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _deep_merge(result[key], value)
        else:
            result[key] = value
    return result


def load_config(path: Path, config_class: Type[T] = AppConfig) -> T:  # type: ignore[assignment]
    """
    Load and validate configuration from YAML file.

    ``common_config.yaml`` next to ``path`` is loaded first when present and
    the user file is deep-merged on top of it.

    Raises:
        ConfigError: the file cannot be read or does not validate
    """
    common_path = path.parent / COMMON_CONFIG_FILENAME
    if common_path.exists() and common_path.resolve() != path.resolve():
        base_data = load_yaml(common_path)
        logger.info("Loaded common configuration", path=str(common_path))
    else:
        base_data = {}

    merged = _deep_merge(base_data, load_yaml(path))

    try:
        return config_class(**merged)
    except ValidationError as exc:
        raise ConfigError(f"Invalid configuration in {path}", str(exc)) from exc


def config_from_env(default: Optional[Path] = None) -> AppConfig:
    """Load ``$SKDV_CONFIG_PATH`` (or ``default``), falling back to built-in defaults."""
    config_path = os.environ.get(CONFIG_PATH_ENV)
    path = Path(config_path) if config_path else default
    if path is None:
        return AppConfig()
    return load_config(path, AppConfig)
