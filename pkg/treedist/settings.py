"""
Runtime settings for treedist

Values come from, in order of precedence: the process environment, a
.env.treedist file, and config/defaults_manifest.CONFIG_VALUES.
Command-line flags override all of them.
"""

import logging
import os
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config.defaults_manifest import CONFIG_VALUES
from treedist.errors import SettingsError
from treedist.geo_models import DEFAULT_CHAIN_CAP, Algorithm, OutputFormat

try:
    import psutil
except ImportError:
    psutil = None

logger = logging.getLogger(__name__)

ENV_FILE_NAME = ".env.treedist"
ENV_PREFIX = "TREEDIST_"


def default_workers() -> int:
    """Physical core count, 1 when it cannot be determined"""
    if psutil:
        count = psutil.cpu_count(logical=False)
        if count:
            return count
    return 1


class TreeDistSettings(BaseModel):
    """Resolved configuration"""

    model_config = ConfigDict(use_enum_values=True)

    algorithm: Algorithm = Field(default=Algorithm.DIVIDE)
    chain_cap: int = Field(default=DEFAULT_CHAIN_CAP, ge=1)
    workers: int = Field(default_factory=default_workers, ge=1)
    output_format: OutputFormat = Field(default=OutputFormat.CSV)
    log_level: str = Field(default="WARNING")
    include_leaves: bool = False
    default_length: Optional[float] = Field(default=None, ge=0)
    otlp_endpoint: Optional[str] = None
    trace_console: bool = False

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        level = v.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"Unknown log level '{v}'")
        return level


def _load_env_file(env_file: Optional[Union[str, Path]] = None) -> Optional[Path]:
    """Load the first .env.treedist found; existing variables win"""
    if env_file is not None:
        path = Path(env_file)
        if not path.exists():
            raise SettingsError(f"Settings file {path} does not exist")
        load_dotenv(path, override=False)
        logger.info(f"Loaded configuration from {path}")
        return path

    for path in (Path(ENV_FILE_NAME), Path.home() / ENV_FILE_NAME):
        if path.exists():
            load_dotenv(path, override=False)
            logger.info(f"Loaded configuration from {path}")
            return path

    logger.debug(f"No {ENV_FILE_NAME} found, using environment variables and defaults")
    return None


def load_settings(env_file: Optional[Union[str, Path]] = None) -> TreeDistSettings:
    """
    Resolve settings from the environment, a dotenv file and the manifest

    Raises:
        SettingsError: if a value cannot be parsed; the message names the
            variable
    """
    _load_env_file(env_file)

    values = {}
    for key, default in CONFIG_VALUES.items():
        raw = os.getenv(key, default).strip()
        if raw == "":
            continue
        values[key[len(ENV_PREFIX):].lower()] = raw

    try:
        return TreeDistSettings(**values)
    except ValidationError as e:
        error = e.errors()[0]
        field = error["loc"][0] if error["loc"] else "?"
        variable = f"{ENV_PREFIX}{str(field).upper()}"
        raise SettingsError(f"Invalid value for {variable}: {error['msg']}") from e


_settings_instance: Optional[TreeDistSettings] = None


def get_settings() -> TreeDistSettings:
    """Cached settings shared by the whole process"""
    global _settings_instance

    if _settings_instance is None:
        _settings_instance = load_settings()

    return _settings_instance


def reset_settings() -> None:
    global _settings_instance
    _settings_instance = None
