"""
Configuration Management - Load and validate nulllda settings
"""

from pathlib import Path
from typing import Any, Dict, Literal, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_CONFIG_DIR = Path(__file__).parent.parent.parent / "config"
DEFAULT_CONFIG_FILE = DEFAULT_CONFIG_DIR / "nulllda.yaml"


class FitSettings(BaseModel):
    seed: int = Field(0, ge=0, description="Seed of the Gaussian sketch generator")
    max_retries: int = Field(5, ge=0, description="Redraws allowed after a failed certificate")
    near_singular_threshold: float = Field(1e-8, gt=0, lt=1)
    safety_factor: float = Field(10.0, ge=1)


class StructureSettings(BaseModel):
    unit_eigenvalue_tol: float = Field(1e-8, gt=0, lt=0.5)


class RankSettings(BaseModel):
    relative_tol: Optional[float] = Field(None, gt=0, description="None means max(d, n) * u")


class LoggingSettings(BaseModel):
    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "WARNING"
    file: Optional[Path] = None

    @field_validator("level", mode="before")
    @classmethod
    def _upper(cls, value: Any) -> Any:
        return value.upper() if isinstance(value, str) else value


class NullLdaSettings(BaseSettings):
    """Settings resolved from YAML, overridden by NULLLDA_* environment variables."""

    model_config = SettingsConfigDict(env_prefix="NULLLDA_", env_nested_delimiter="__")

    fit: FitSettings = FitSettings()
    structure: StructureSettings = StructureSettings()
    rank: RankSettings = RankSettings()
    logging: LoggingSettings = LoggingSettings()

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ):
        # environment beats the YAML values passed as init kwargs
        return env_settings, init_settings, dotenv_settings, file_secret_settings


class ConfigError(ValueError):
    """Configuration file missing required structure or holding invalid values."""


def load_config(config_path: Optional[Path] = None) -> NullLdaSettings:
    """Load settings from a YAML file (default config/nulllda.yaml)."""
    path = Path(config_path) if config_path is not None else DEFAULT_CONFIG_FILE

    raw: Dict[str, Any] = {}
    if path.exists():
        with open(path, "r") as f:
            raw = yaml.safe_load(f) or {}
    elif config_path is not None:
        raise ConfigError(f"Config file not found: {path}")
    else:
        logger.warning("Config file not found, using built-in defaults", path=str(path))

    section = raw.get("nulllda", raw)
    if not isinstance(section, dict):
        raise ConfigError(f"Config file {path} must hold a mapping under 'nulllda'")

    try:
        settings = NullLdaSettings(**section)
    except ValidationError as e:
        logger.error("Configuration validation failed", path=str(path), error=str(e))
        raise ConfigError(f"Invalid configuration in {path}: {e}") from e

    logger.debug("Configuration loaded", path=str(path))
    return settings
