"""Configuration management module."""

from skdv_core.config.loader import load_config, load_yaml, save_yaml
from skdv_core.config.models import (
    AppConfig,
    DerivationConfig,
    FermionMode,
    GridConfig,
    InitialCondition,
    LoggingConfig,
    OutputConfig,
    SimConfig,
    SolitonSpec,
)

__all__ = [
    "load_config",
    "load_yaml",
    "save_yaml",
    "AppConfig",
    "DerivationConfig",
    "FermionMode",
    "GridConfig",
    "InitialCondition",
    "LoggingConfig",
    "OutputConfig",
    "SimConfig",
    "SolitonSpec",
]
