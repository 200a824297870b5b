"""Configuration models using Pydantic."""

import os
import re
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from skdv_core.numerics.grassmann import MAX_GENERATORS


def resolve_env_vars(value: str) -> str:
    """
    Resolve environment variables in a string.

    Supports formats:
    - ${VAR} - Required variable
    - ${VAR:-default} - Variable with default value
    """
    pattern = r"\$\{([^}:]+)(?::-([^}]*))?\}"

    def replacer(match):
        var_name = match.group(1)
        default = match.group(2)

        env_value = os.environ.get(var_name)
        if env_value is not None:
            return env_value
        elif default is not None:
            return default
        else:
            raise ValueError(f"Environment variable '{var_name}' is not set and has no default")

    return re.sub(pattern, replacer, value)


def _params_to_str(value: Any) -> dict[str, str]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ValueError("params must be a mapping of name to value")
    return {str(k): str(v) for k, v in value.items()}


class LoggingConfig(BaseModel):
    """Logging configuration."""

    level: str = Field(default="INFO", description="Log level")
    json_format: bool = Field(default=False, description="Emit JSON log lines")
    file: Optional[Path] = Field(default=None, description="Optional log file")

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR"]
        if v.upper() not in valid_levels:
            raise ValueError(f"level must be one of {valid_levels}")
        return v.upper()


class GridConfig(BaseModel):
    """Periodic domain and resolution."""

    length: float = Field(default=40.0, gt=0, description="Domain length L")
    points: int = Field(default=256, ge=4, description="Grid points, a power of two")

    @field_validator("points")
    @classmethod
    def validate_points(cls, v: int) -> int:
        if v & (v - 1):
            raise ValueError("points must be a power of two")
        return v


class SolitonSpec(BaseModel):
    """One KdV soliton ``2 kappa^2 sech^2(kappa (x - x0))``."""

    kappa: float = Field(default=1.0, gt=0)
    x0: float = 0.0


class FermionMode(BaseModel):
    """``amplitude * sech(width * (x - center)) * g_generator`` added to an odd field."""

    generator: int = Field(default=1, ge=1, le=MAX_GENERATORS)
    field: str = "xi"
    amplitude: float = 0.1
    width: float = Field(default=1.0, gt=0)
    center: float = 0.0


class InitialCondition(BaseModel):
    """Initial data: a sum of solitons in the boson plus fermionic modes."""

    boson: str = "u"
    solitons: list[SolitonSpec] = Field(default_factory=lambda: [SolitonSpec()])
    fermions: list[FermionMode] = Field(default_factory=list)


class SimConfig(BaseModel):
    """Simulation configuration."""

    model_config = {"extra": "ignore"}

    model: str = Field(default="kdv", description="Registered model name")
    params: dict[str, str] = Field(default_factory=dict)
    generators: int = Field(default=0, ge=0, le=MAX_GENERATORS)
    grid: GridConfig = Field(default_factory=GridConfig)
    initial: InitialCondition = Field(default_factory=InitialCondition)
    dt: float = Field(default=1e-4, gt=0)
    t_final: float = Field(default=1.0, ge=0)
    output_interval: float = Field(default=0.1, gt=0)
    stepper: Literal["rk4"] = "rk4"
    dealias: bool = True
    monitors: list[str] = Field(default_factory=lambda: ["mass", "momentum", "hamiltonian"])

    @field_validator("params", mode="before")
    @classmethod
    def coerce_params(cls, v: Any) -> dict[str, str]:
        """Accept numbers from YAML and keep exact text."""
        return _params_to_str(v)

    @model_validator(mode="after")
    def check_generators(self) -> "SimConfig":
        for mode in self.initial.fermions:
            if mode.generator > self.generators:
                raise ValueError(
                    f"fermion mode uses generator {mode.generator} "
                    f"but only {self.generators} generators are configured"
                )
        return self

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def output_every(self) -> int:
        return max(1, int(round(self.output_interval / self.dt)))


class OutputConfig(BaseModel):
    """Where reports and CSV files go."""

    directory: Path = Field(default=Path("./output"), description="Output directory")
    timeseries: str = "timeseries.csv"
    final_state: str = "final_state.csv"
    settings: str = "simulation.yaml"
    format: Literal["json", "text", "csv"] = "json"

    @field_validator("directory", mode="before")
    @classmethod
    def resolve_path_vars(cls, v):
        if isinstance(v, str) and v.startswith("${"):
            v = resolve_env_vars(v)
        return Path(v).expanduser()


class DerivationConfig(BaseModel):
    """Constraint analysis settings."""

    model: str = "skdv2_lagrangian"
    params: dict[str, str] = Field(default_factory=dict)
    max_generations: int = Field(default=10, ge=1)
    momentum_prefix: str = "Pi_"

    @field_validator("params", mode="before")
    @classmethod
    def coerce_params(cls, v: Any) -> dict[str, str]:
        return _params_to_str(v)


class AppConfig(BaseModel):
    """Complete application configuration."""

    model_config = {"extra": "ignore"}

    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    simulation: SimConfig = Field(default_factory=SimConfig)
    derivation: DerivationConfig = Field(default_factory=DerivationConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
